/* Smallest useful round trip through the C surface. Build against either
 * library flavor from the workspace root:
 *
 *   cargo build -p landscape-lab-ffi
 *   cc crates/ffi/examples/demo.c -I crates/ffi/include \
 *      -L target/debug -l landscape_lab_ffi -lm -o demo
 *   LD_LIBRARY_PATH=target/debug ./demo
 */
#include <stdio.h>
#include <stdlib.h>
#include "landscape_lab.h"

int main(void) {
    LlPotential *p = NULL;
    if (ll_potential_generate(150, 6, 1e3, 7, &p) != LL_OK) {
        fprintf(stderr, "generate: %s\n", ll_last_error_message());
        return 1;
    }
    size_t n = ll_potential_len(p);

    LlEigenSet *eig = NULL;
    if (ll_eigenpairs_solve(p, 2, &eig) != LL_OK) return 1;
    double lambda = 0.0;
    ll_eigenset_lambda(eig, 0, &lambda);

    LlLandscape *u = NULL;
    if (ll_landscape_solve(p, NULL, 0, &u) != LL_OK) return 1;
    double *uv = malloc(n * sizeof(double));
    double *phi = malloc(n * sizeof(double));
    if (ll_landscape_values(u, uv, n) != LL_OK) return 1;
    if (ll_eigenset_vector(eig, 0, phi, n) != LL_OK) return 1;

    int violations = 0;
    for (size_t i = 0; i < n; i++)
        if (phi[i] > lambda * uv[i] + 1e-10 || phi[i] < -(lambda * uv[i] + 1e-10)) violations++;

    printf("version %s, n=%zu, lambda1=%.6f, bound violations=%d\n",
           ll_version(), n, lambda, violations);

    double bad = 0.0;
    int rc = ll_potential_sup(NULL, &bad);
    printf("null handle -> code %d (%s)\n", rc, ll_last_error_message());

    free(uv); free(phi);
    ll_landscape_free(u);
    ll_eigenset_free(eig);
    ll_potential_free(p);
    return violations == 0 && rc == LL_NULL_POINTER ? 0 : 1;
}
