/* Compiled as C to keep the public header C-clean. */
#include <stdio.h>
#include <string.h>

#include "plantsite/plantsite.h"

int main(void)
{
    ps_config* cfg = NULL;
    if (ps_config_new(&cfg) != PS_OK) return 1;
    if (ps_config_set(cfg, "alpha", "7") == PS_OK) return 2;
    if (strlen(ps_last_error()) == 0) return 3;
    ps_config_free(cfg);
    if (strcmp(ps_status_name(PS_OK), "ok") != 0) return 4;
    puts(ps_version());
    return 0;
}
