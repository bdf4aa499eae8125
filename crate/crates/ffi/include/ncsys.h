/* C interface to the ncsys exact computer-algebra library. */

#ifndef NCSYS_H
#define NCSYS_H

/* Generated by cbindgen from crates/ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every FFI call.
 */
typedef enum NcsysStatus {
  NCSYS_STATUS_OK = 0,
  NCSYS_STATUS_NULL_ARGUMENT = 1,
  NCSYS_STATUS_UTF8 = 2,
  NCSYS_STATUS_SCHEMA = 3,
  NCSYS_STATUS_PRECONDITION = 4,
  NCSYS_STATUS_VERIFY_FAILED = 5,
  NCSYS_STATUS_INCONCLUSIVE = 6,
  NCSYS_STATUS_PANIC = 7,
} NcsysStatus;

/*
 Opaque automorphism handle.
 */
typedef struct NcsysAut NcsysAut;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static string; do not free.
 */
const char *ncsys_version(void);

/*
 Detail message of the last error on this thread, or null. Free with
 [`ncsys_string_free`].
 */
char *ncsys_last_error(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must be null or a string pointer previously returned by this library,
 not yet freed.
 */
void ncsys_string_free(char *s);

/*
 Releases an automorphism handle.

 # Safety
 `handle` must be null or a handle previously returned by this library,
 not yet freed.
 */
void ncsys_aut_free(struct NcsysAut *handle);

/*
 Parses an automorphism document.

 # Safety
 `json` must be a valid NUL-terminated string; `out` a valid out-pointer.
 */
enum NcsysStatus ncsys_aut_from_json(const char *json, struct NcsysAut **out);

/*
 Serializes an automorphism to its JSON document.

 # Safety
 `handle` must be a valid handle; `out_json` a valid out-pointer.
 */
enum NcsysStatus ncsys_aut_to_json(const struct NcsysAut *handle, char **out_json);

/*
 Inverse automorphism.

 # Safety
 `handle` must be a valid handle; `out` a valid out-pointer.
 */
enum NcsysStatus ncsys_aut_invert(const struct NcsysAut *handle, struct NcsysAut **out);

/*
 Composition `first(second(z))`.

 # Safety
 Both handles must be valid; `out` a valid out-pointer.
 */
enum NcsysStatus ncsys_aut_compose(const struct NcsysAut *first,
                                   const struct NcsysAut *second,
                                   struct NcsysAut **out);

/*
 Derivation logarithm of an automorphism, as a D-Log JSON document.

 # Safety
 `handle` must be a valid handle; `out_json` a valid out-pointer.
 */
enum NcsysStatus ncsys_aut_dlog(const struct NcsysAut *handle, char **out_json);

/*
 Exponentiates a D-Log JSON document back to an automorphism handle.

 # Safety
 `json` must be a valid NUL-terminated string; `out` a valid out-pointer.
 */
enum NcsysStatus ncsys_exp_from_json(const char *json, struct NcsysAut **out);

/*
 Solved family tables to the given weight bound, as a JSON array of
 `{family, m, element}` rows. The weight bound is capped at 12.

 # Safety
 `out_json` must be a valid out-pointer.
 */
enum NcsysStatus ncsys_nsym_table(uint32_t max_weight, char **out_json);

/*
 Runs a verification suite (`"ncs"`, `"correspondence"`, `"group"`,
 `"graded"`, `"hopf-action"` or `"all"`) on the published grid. Writes the
 report document even when checks fail; failing checks yield
 `NcsysStatus::VerifyFailed`.

 # Safety
 `suite` must be a valid NUL-terminated string; `out_json` a valid
 out-pointer.
 */
enum NcsysStatus ncsys_verify(const char *suite, uint64_t seed, uint32_t trials, char **out_json);

/*
 Separation search for a nonzero element document. Writes the outcome
 document; an exhausted budget yields `NcsysStatus::Inconclusive`.
 `commutative` is 0 for free variables, nonzero for commutative ones.

 # Safety
 `element_json` must be a valid NUL-terminated string; `out_json` a valid
 out-pointer.
 */
enum NcsysStatus ncsys_separate(const char *element_json,
                                uint32_t max_n,
                                uint32_t attempts,
                                uint64_t seed,
                                int32_t commutative,
                                char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCSYS_H */
