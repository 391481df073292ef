#include <stdio.h>
#include <math.h>
#include "mixcurv.h"

int main(void) {
    MixcurvScenario *scn = NULL;
    if (mixcurv_scenario_from_preset("warped_torus", NULL, &scn) != MIXCURV_STATUS_OK) {
        fprintf(stderr, "preset: %s\n", mixcurv_last_error_message());
        return 1;
    }
    double x[2] = {1.5707963267948966, 0.4};
    double lhs = 0.0, rhs = 0.0;
    if (mixcurv_evaluate_pointwise(scn, "PW", x, 2, &lhs, &rhs) != MIXCURV_STATUS_OK) return 2;
    if (fabs(lhs - 1.0 / 3.0) > 1e-9 || fabs(rhs - 1.0 / 3.0) > 1e-9) return 3;

    if (mixcurv_evaluate_pointwise(scn, "NOPE", x, 2, &lhs, &rhs) != MIXCURV_STATUS_UNKNOWN_IDENTITY) return 4;
    if (mixcurv_last_error_message() == NULL) return 5;

    MixcurvReport *rep = NULL;
    if (mixcurv_check(scn, "PW-IF", 16, 1e-9, &rep) != MIXCURV_STATUS_OK) return 6;
    if (mixcurv_report_passed(rep) != 1) return 7;
    char *json = mixcurv_report_json(rep);
    if (json == NULL) return 8;
    mixcurv_string_free(json);
    mixcurv_report_free(rep);
    mixcurv_scenario_free(scn);
    printf("ok %s\n", mixcurv_version());
    return 0;
}
