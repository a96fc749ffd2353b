#include <stdio.h>
#include "mps.h"

int run(void) {
    MpsInstance *inst = NULL;
    MpsSchedule *sched = NULL;
    MpsProfit profit;
    char *text = NULL;
    if (mps_instance_base_case(1, &inst) != MPS_STATUS_OK) {
        fprintf(stderr, "%s\n", mps_last_error());
        return 1;
    }
    if (mps_run_heuristic(inst, &sched, &profit) != MPS_STATUS_OK) {
        mps_instance_free(inst);
        return 1;
    }
    if (mps_compare(inst, 7, "csv", &text) == MPS_STATUS_OK) {
        puts(text);
        mps_string_free(text);
    }
    printf("%f %f\n", profit.profit, profit.utilization);
    mps_schedule_free(sched);
    mps_instance_free(inst);
    return 0;
}
