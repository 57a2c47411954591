#include <stdio.h>
#include "apollonian.h"

int main(void) {
    ApStore *store = NULL;
    if (ap_store_generate("bounded", true, 1000.0, &store) != AP_STATUS_OK) {
        char msg[256];
        ap_last_error(msg, sizeof msg);
        fprintf(stderr, "generate: %s\n", msg);
        return 1;
    }
    size_t n = 0;
    ap_store_len(store, &n);
    ApFit fit;
    ap_store_fit_curvature_growth(store, 10.0, 1000.0, 16, &fit);
    printf("apollonian %s: %zu circles, growth exponent %.4f\n", ap_version(), n, fit.exponent);
    ap_store_free(store);
    return 0;
}
