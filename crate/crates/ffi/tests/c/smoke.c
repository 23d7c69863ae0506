#include <math.h>
#include <stdio.h>

#include "covctl.h"

int main(void) {
    CovEnv *env = NULL;
    if (cov_env_generate("{\"kind\":\"chain\",\"m\":12,\"valued\":12}", 0, 1e-3, &env) != COV_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", cov_last_error());
        return 1;
    }
    size_t pos[2] = {2, 8};
    double g = 0.0;
    if (cov_objective(env, pos, 2, &g) != COV_STATUS_OK || fabs(g - 5.833333333333333) > 1e-9) {
        fprintf(stderr, "objective %f\n", g);
        return 2;
    }
    CovRun *run = NULL;
    if (cov_run(env, "opt", 2, 0, &run) != COV_STATUS_OK) {
        fprintf(stderr, "run: %s\n", cov_last_error());
        return 3;
    }
    size_t out[2];
    size_t n = cov_run_positions(run, out, 2);
    printf("opt %zu agents G=%.4f at %zu %zu\n", n, cov_run_objective(run), out[0], out[1]);
    if (fabs(cov_run_objective(run) - g) > 1e-9) {
        return 4;
    }
    if (cov_run(env, "bogus", 2, 0, &run) != COV_STATUS_INVALID_ARGUMENT || cov_last_error() == NULL) {
        return 5;
    }
    cov_run_free(run);
    cov_env_free(env);
    return 0;
}
