#include "ncsys.h"
#include <assert.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    const char *doc =
        "{\"n\":1,\"commutative\":true,\"alpha\":2,\"N_z\":9,\"N_t\":8,"
        "\"H\":[[{\"t\":1,\"exps\":[2],\"coeff\":\"1/1\"}]]}";
    NcsysAut *aut = NULL;
    assert(ncsys_aut_from_json(doc, &aut) == NCSYS_STATUS_OK);
    NcsysAut *inv = NULL;
    assert(ncsys_aut_invert(aut, &inv) == NCSYS_STATUS_OK);
    char *json = NULL;
    assert(ncsys_aut_to_json(inv, &json) == NCSYS_STATUS_OK);
    assert(strstr(json, "-429/1") != NULL);
    ncsys_string_free(json);

    char *dlog = NULL;
    assert(ncsys_aut_dlog(aut, &dlog) == NCSYS_STATUS_OK);
    NcsysAut *back = NULL;
    assert(ncsys_exp_from_json(dlog, &back) == NCSYS_STATUS_OK);
    ncsys_string_free(dlog);

    char *report = NULL;
    assert(ncsys_verify("graded", 5, 1, &report) == NCSYS_STATUS_OK);
    assert(strstr(report, "\"status\":\"pass\"") != NULL);
    assert(strstr(report, "\"status\":\"fail\"") == NULL);
    ncsys_string_free(report);

    assert(ncsys_aut_from_json("{bad", &aut) == NCSYS_STATUS_SCHEMA);
    char *err = ncsys_last_error();
    assert(err != NULL && strlen(err) > 0);
    ncsys_string_free(err);

    ncsys_aut_free(aut);
    ncsys_aut_free(inv);
    ncsys_aut_free(back);
    printf("C smoke test ok, version %s\n", ncsys_version());
    return 0;
}
