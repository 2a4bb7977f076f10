#ifndef REQFORUM_H
#define REQFORUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every `rf_*` call.
typedef enum RfStatus {
  RF_STATUS_OK = 0,
  // Null pointer, invalid UTF-8 or malformed JSON argument.
  RF_STATUS_INVALID_ARGUMENT = 1,
  // A Rust panic was caught at the boundary.
  RF_STATUS_PANIC = 2,
  RF_STATUS_INVALID_TRANSITION = 10,
  RF_STATUS_FORBIDDEN = 11,
  RF_STATUS_STALE_VERSION = 12,
  RF_STATUS_NOT_FOUND = 13,
  RF_STATUS_SELF_RELATION = 14,
  RF_STATUS_MALFORMED_TEMPLATE = 15,
  RF_STATUS_TEMPLATE_VIOLATIONS = 16,
  RF_STATUS_DUPLICATE = 17,
  RF_STATUS_UNAUTHENTICATED = 18,
  RF_STATUS_BAD_CREDENTIALS = 19,
  RF_STATUS_TOPIC_NOT_OPEN = 20,
  RF_STATUS_EMPTY_BODY = 21,
  RF_STATUS_POLL_CLOSED = 22,
  RF_STATUS_UNKNOWN_OPTION = 23,
  RF_STATUS_ARITY_MISMATCH = 24,
  RF_STATUS_SESSION_CLOSED = 25,
  RF_STATUS_NOT_PARTICIPANT = 26,
  RF_STATUS_LENGTH_MISMATCH = 27,
  RF_STATUS_ALREADY_ACCEPTED = 28,
  RF_STATUS_INSUFFICIENT_SCORE = 29,
  RF_STATUS_OUT_OF_STOCK = 30,
  RF_STATUS_INVALID_AMOUNT = 31,
  RF_STATUS_INVALID_CONFIG = 32,
  RF_STATUS_BAD_REQUEST = 33,
  RF_STATUS_ALREADY_EXISTS = 34,
  RF_STATUS_STORAGE = 35,
} RfStatus;

// Opaque forum handle.
typedef struct RfForum RfForum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The `{ code, message, details }` JSON of the last failed call on this
// thread, or null. Valid until the next `rf_*` call on the same thread.
const char *rf_last_error(void);

// Machine-readable name of a status, e.g. `"DUPLICATE"`. Static storage.
const char *rf_status_name(enum RfStatus status);

// Releases a string returned through an `out` parameter. Null is ignored.
//
// # Safety
// `s` is null or was produced by this library and not yet freed.
void rf_string_free(char *s);

// Opens a forum from TOML configuration text. Null or empty text gives an
// in-memory forum with default settings.
//
// # Safety
// `config_toml` is null or a NUL-terminated string; `out` is writable.
enum RfStatus rf_forum_open(const char *config_toml, struct RfForum **out);

// Closes a forum. Null is ignored.
//
// # Safety
// `forum` is null or a handle from [`rf_forum_open`] not yet freed.
void rf_forum_free(struct RfForum *forum);

// Loads a seed fixture; writes the created ids as JSON to `out_json`.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_seed(const struct RfForum *forum, const char *fixture_json, char **out_json);

// Logs in; writes the session (with its `token`) as JSON.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_login(const struct RfForum *forum,
                       const char *handle_name,
                       const char *secret,
                       char **out_json);

// Runs the creation pipeline with a JSON request
// (`{ "template_id", "fields", ... }`); writes the new topic as JSON.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_create_topic(const struct RfForum *forum,
                              const char *token,
                              const char *request_json,
                              char **out_json);

// Fires a lifecycle event named like `"OPEN_FOR_SUGGESTIONS"`. A non-zero
// `expected_version` must match the stored version. Writes
// `{ "topic", "transition" }`.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_apply_event(const struct RfForum *forum,
                             const char *token,
                             uint64_t topic,
                             const char *event,
                             uint64_t expected_version,
                             char **out_json);

// Adds a post, merging into the last one when the caller wrote it. Writes
// `{ "post", "merged" }`.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_add_post(const struct RfForum *forum,
                          const char *token,
                          uint64_t topic,
                          const char *body,
                          char **out_json);

// Writes the aggregated view of one topic.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_aggregate(const struct RfForum *forum,
                           const char *token,
                           uint64_t topic,
                           char **out_json);

// Exports aggregated views. `states_csv` is null for every topic or a
// comma-separated state list such as `"LOCKED,UNLOCKED"`.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_export(const struct RfForum *forum,
                        const char *token,
                        const char *states_csv,
                        char **out_json);

// Dry-runs the duplicate gate for `text`; writes the screening result.
//
// # Safety
// Pointers are valid as described in the module documentation.
enum RfStatus rf_screen(const struct RfForum *forum, const char *text_in, char **out_json);

// Character n-gram Jaccard similarity of two texts after normalization.
//
// # Safety
// `a` and `b` are NUL-terminated strings; `out` is writable.
enum RfStatus rf_similarity(const char *a, const char *b, size_t gram_size, double *out);

// Lowercases, collapses whitespace and trims.
//
// # Safety
// `text_in` is a NUL-terminated string; `out` is writable.
enum RfStatus rf_normalize(const char *text_in, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REQFORUM_H */
