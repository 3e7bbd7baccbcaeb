#include <stdio.h>
#include <string.h>
#include "parrep.h"

int main(void) {
    PrGame *g = NULL;
    if (pr_game_from_fixture("chsh", &g) != PR_STATUS_OK) return 10;
    PrStrategy *s = NULL;
    if (pr_strategy_load(g, "tsirelson", 1, &s) != PR_STATUS_OK) return 11;
    double v = 0.0;
    if (pr_win_probability(g, s, &v) != PR_STATUS_OK) return 12;
    if (v < 0.8535 || v > 0.8536) return 13;
    if (pr_game_from_fixture("nope", &g) != PR_STATUS_NOT_FOUND) return 14;
    if (strlen(pr_last_error()) == 0) return 15;
    PrReport *r = NULL;
    if (pr_reduction_run("{\"n\": 2, \"c\": [1]}", &r) != PR_STATUS_OK) return 16;
    PrReductionSummary sum;
    if (pr_report_summary(r, &sum) != PR_STATUS_OK || !sum.within_budget) return 17;
    printf("%s %.6f %.3e\n", pr_version(), v, sum.avg_residual);
    pr_report_free(r);
    pr_strategy_free(s);
    pr_game_free(g);
    return 0;
}
