/* Exercises the C API end to end; prints the final state. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "chemostat.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        ChmStatus st_ = (call);                                            \
        if (st_ != CHM_STATUS_OK) {                                        \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_,             \
                    chm_last_error() ? chm_last_error() : "(none)");       \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    ChmParams *params = NULL;
    ChmNoise *noise = NULL;
    ChmTrajectory *traj = NULL;
    char *report = NULL;

    CHECK(chm_params_figure(3, &params));
    CHECK(chm_noise_sample(7, 20.0, 0.01, 10.0, &noise));
    CHECK(chm_integrate(params, noise, 20.0, 14.0, 10.0, 20.0, 0.01, 100, &traj));

    size_t n = chm_trajectory_len(traj);
    double *t = malloc(n * sizeof *t), *s = malloc(n * sizeof *s);
    double *m1 = malloc(n * sizeof *m1), *m2 = malloc(n * sizeof *m2);
    CHECK(chm_trajectory_copy(traj, t, s, m1, m2, n));
    printf("points=%zu t=%.3f s=%.6f m1=%.6f m2=%.6f\n", n, t[n - 1], s[n - 1], m1[n - 1], m2[n - 1]);

    CHECK(chm_analyze_json(params, 0, 0, &report));
    if (strstr(report, "\"vartheta\"") == NULL) {
        fprintf(stderr, "report lacks vartheta\n");
        return 1;
    }

    /* Error path: the message must be available. */
    ChmParams *bad = NULL;
    if (chm_params_from_json("{\"s_in\": 1}", &bad) != CHM_STATUS_CONFIG || chm_last_error() == NULL) {
        fprintf(stderr, "bad parameters accepted\n");
        return 1;
    }

    chm_string_free(report);
    chm_trajectory_free(traj);
    chm_noise_free(noise);
    chm_params_free(params);
    free(t); free(s); free(m1); free(m2);
    printf("version=%s\n", chm_version());
    return 0;
}
