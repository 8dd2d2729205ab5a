#include <stdio.h>
#include <string.h>
#include "finsler.h"

int main(void) {
    FinslerMetric *m = NULL;
    if (finsler_metric_from_zoo("hermitian_kahler_potential", &m) != FINSLER_STATUS_OK) {
        fprintf(stderr, "%s\n", finsler_last_error_message());
        return 1;
    }
    FinslerPlan plan = finsler_plan_default();
    plan.z_count = 2;
    plan.eta_count = 2;
    FinslerVerdict v[7];
    int32_t inconsistent = -1;
    if (finsler_classify_lattice(m, plan, 1e-7, v, 7, &inconsistent) != FINSLER_STATUS_OK) {
        fprintf(stderr, "%s\n", finsler_last_error_message());
        return 1;
    }
    for (int i = 0; i < 7; i++) {
        if (v[i] != FINSLER_VERDICT_HOLDS) return 2;
    }
    if (inconsistent != 0) return 3;

    double s[8] = {0.1, 0.2, -0.3, 0.05, 0.7, -0.2, 0.4, 0.5};
    double g[8];
    if (finsler_fundamental_tensor(m, s, 8, g, 8) != FINSLER_STATUS_OK) return 4;
    if (g[1] != 0.0 || g[0] <= 0.0) return 5;

    FinslerMetric *bad = NULL;
    if (finsler_metric_from_zoo("nope", &bad) != FINSLER_STATUS_UNKNOWN_ID || bad != NULL) return 6;
    if (strstr(finsler_last_error_message(), "nope") == NULL) return 7;

    finsler_metric_free(m);
    printf("ok\n");
    return 0;
}
