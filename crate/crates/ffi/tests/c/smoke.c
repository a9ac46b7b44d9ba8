#include <math.h>
#include <stdio.h>
#include <string.h>

#include "spectra.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    spectra_last_error());                                 \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    SpectraMatrix *a = NULL;
    CHECK(spectra_construct_rootn(9, &a) == SPECTRA_STATUS_OK);
    CHECK(spectra_matrix_dim(a) == 9);
    CHECK(spectra_matrix_is_exact(a) == 1);

    double values[81];
    CHECK(spectra_matrix_values(a, values) == SPECTRA_STATUS_OK);
    CHECK(fabs(values[0] - 44.0 / 60.0) < 1e-15);

    double phi = 0.0;
    size_t witness[9];
    size_t len = 0;
    int exact = 0;
    CHECK(spectra_phi(a, 0, &phi, witness, &len, &exact) == SPECTRA_STATUS_OK);
    CHECK(exact == 1 && len >= 1 && phi <= 16.0 / 60.0 + 1e-12);

    double gap = 0.0;
    CHECK(spectra_spectral_gap(a, &gap) == SPECTRA_STATUS_OK);
    CHECK(fabs(gap - 1.0) < 1e-8);

    SpectraMatrix *bad = NULL;
    CHECK(spectra_construct_rootn(10, &bad) == SPECTRA_STATUS_NOT_PERFECT_SQUARE);
    CHECK(bad == NULL);
    CHECK(strlen(spectra_last_error()) > 0);

    char *text = NULL;
    CHECK(spectra_matrix_to_string(a, "rational-json", &text) == SPECTRA_STATUS_OK);
    CHECK(strstr(text, "\"num\"") != NULL);
    spectra_string_free(text);

    spectra_matrix_free(a);
    printf("ok %s\n", spectra_version());
    return 0;
}
