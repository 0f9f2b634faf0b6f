/* Minimal C client: builds a dataset, runs the test, prints the summary.
 *
 *   cargo build -p subtrend-ffi --release
 *   cc -I crates/ffi/include crates/ffi/examples/smoke.c \
 *      target/release/libsubtrend_ffi.a -lpthread -ldl -lm -o smoke
 */
#include <stdio.h>

#include "subtrend.h"

static int check(StStatus status) {
    if (status != ST_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", (int)status, st_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    const char *csv =
        "group,level,value\n"
        "A,1,1.0\nA,1,2.0\nA,2,3.0\nA,2,0.5\nA,3,2.5\n"
        "B,1,0.7\nB,1,1.1\nB,2,2.9\nB,2,3.3\nB,3,0.1\n";
    StDataset *ds = NULL;
    StTestResult *res = NULL;
    StTestSummary summary;
    StTestOptions opts = st_test_options_default();
    opts.n_boot = 2000;
    opts.seed = 42;

    if (check(st_dataset_from_csv(csv, 0, &ds))) return 1;
    if (check(st_bootstrap_test(ds, &opts, &res))) return 1;
    if (check(st_result_summary(res, &summary))) return 1;
    printf("subtrend %s: M = %.4f, p = %.4f, reject = %d\n", st_version(),
           summary.m_observed, summary.p_value, (int)summary.reject);

    char *json = NULL;
    if (check(st_result_to_json(res, &json))) return 1;
    st_string_free(json);

    double mass[5];
    size_t len = 0;
    if (check(st_exact_pmf(2, 2, 0.5, mass, 5, &len))) return 1;
    printf("Pr(O = 0) = %.4f over %zu outcomes\n", mass[0], len);

    const double *sample = NULL;
    size_t n = 0;
    st_result_bootstrap_sample(res, &sample, &n);
    double m = 0.0;
    double o_x[1] = {5}, o_y[1] = {5};
    uint64_t t_x[1] = {25}, t_y[1] = {25};
    st_m_statistic(o_x, o_y, t_x, t_y, 1, &m);
    size_t levels = 0;
    st_dataset_num_levels(ds, &levels);
    (void)st_fixed_table_test;
    (void)st_dataset_from_arrays;
    (void)st_simulate_json;

    st_result_free(res);
    st_dataset_free(ds);
    return 0;
}
