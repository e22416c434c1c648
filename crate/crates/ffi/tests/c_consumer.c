#include <math.h>
#include <stdio.h>
#include "garchpd.h"

int main(void) {
    GdParams *p = NULL;
    GdTable *raw = NULL, *t = NULL;
    GdRisk r;
    double scale = 0.0;
    if (gd_params_new(1.14e-5, 0.131007, 0.845708, 0.0, 0.0004895855701095125,
                      0.0004895855701095125, 1, &p) != GD_STATUS_OK) return 10;
    if (gd_table_build(p, 2, 0, &raw) != GD_STATUS_OK) return 11;
    if (gd_table_standardize(raw, &scale, &t) != GD_STATUS_OK) return 12;
    if (gd_risk(t, 0.005, &r) != GD_STATUS_OK) return 13;
    printf("%.4f %.4f\n", r.var, r.es);
    if (fabs(r.var - 2.6092) > 5e-5 || fabs(r.es - 2.9612) > 5e-5) return 14;
    if (gd_risk(t, 0.9, &r) != GD_STATUS_DOMAIN || gd_last_error() == NULL) return 15;
    gd_table_free(raw);
    gd_table_free(t);
    gd_params_free(p);
    return 0;
}
