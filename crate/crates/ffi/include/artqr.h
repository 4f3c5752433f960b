#ifndef ARTQR_H
#define ARTQR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ArtqrStatus {
  ARTQR_STATUS_OK = 0,
  ARTQR_STATUS_NULL_POINTER = 1,
  ARTQR_STATUS_INVALID_ARGUMENT = 2,
  ARTQR_STATUS_IO = 3,
  ARTQR_STATUS_DECODE_FAILED = 4,
  ARTQR_STATUS_NON_CONVERGENCE = 5,
  ARTQR_STATUS_STYLIZER = 6,
  ARTQR_STATUS_PANIC = 7,
} ArtqrStatus;

/**
 * A generated code: the scheduled symbol, its geometry and the composed image.
 */
typedef struct ArtqrCode ArtqrCode;

/**
 * An 8-bit RGB raster.
 */
typedef struct ArtqrImage ArtqrImage;

typedef struct ArtqrGenerateOptions {
  /**
   * Symbol version, 1 to 40.
   */
  uint8_t version;
  /**
   * 0 = L, 1 = M, 2 = Q, 3 = H.
   */
  uint8_t ec_level;
  /**
   * Mask pattern, 0 to 7.
   */
  uint8_t mask;
  /**
   * Pixels per module; odd, at least 3.
   */
  uint32_t module_px;
  /**
   * Spot radius in pixels, or a negative value for the default.
   */
  int32_t spot_radius;
} ArtqrGenerateOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *artqr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *artqr_version(void);

struct ArtqrGenerateOptions artqr_generate_options_default(void);

/**
 * Copies `len` = `width`·`height`·3 bytes of row-major RGB into a new image.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be writable.
 */
enum ArtqrStatus artqr_image_from_rgb(uint32_t width,
                                      uint32_t height,
                                      const uint8_t *data,
                                      size_t len,
                                      struct ArtqrImage **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ArtqrStatus artqr_image_load_png(const char *path, struct ArtqrImage **out);

/**
 * # Safety
 * `image` must be a live handle; `path` a NUL-terminated string.
 */
enum ArtqrStatus artqr_image_save_png(const struct ArtqrImage *image, const char *path);

/**
 * Width in pixels, 0 for a null handle.
 *
 * # Safety
 * `image` must be null or a live handle.
 */
uint32_t artqr_image_width(const struct ArtqrImage *image);

/**
 * Height in pixels, 0 for a null handle.
 *
 * # Safety
 * `image` must be null or a live handle.
 */
uint32_t artqr_image_height(const struct ArtqrImage *image);

/**
 * Copies the raster into `buf`, which must hold exactly width·height·3 bytes.
 *
 * # Safety
 * `image` must be a live handle; `buf` must point to `len` writable bytes.
 */
enum ArtqrStatus artqr_image_copy_rgb(const struct ArtqrImage *image, uint8_t *buf, size_t len);

/**
 * # Safety
 * `image` must be null or a handle not yet freed.
 */
void artqr_image_free(struct ArtqrImage *image);

/**
 * Encodes `message` and blends it into `image`. `options` may be null for
 * the defaults.
 *
 * # Safety
 * `message` must point to `len` bytes; `image` must be a live handle;
 * `options` null or valid; `out` writable.
 */
enum ArtqrStatus artqr_generate(const uint8_t *message,
                                size_t len,
                                const struct ArtqrImage *image,
                                const struct ArtqrGenerateOptions *options,
                                struct ArtqrCode **out);

/**
 * Side of the code image in pixels, 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
uint32_t artqr_code_side(const struct ArtqrCode *code);

/**
 * Mask pattern of the symbol, 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
uint8_t artqr_code_mask(const struct ArtqrCode *code);

/**
 * Copies the composed code image (no quiet zone) into a new handle.
 *
 * # Safety
 * `code` must be a live handle; `out` writable.
 */
enum ArtqrStatus artqr_code_image(const struct ArtqrCode *code, struct ArtqrImage **out);

/**
 * # Safety
 * `code` must be null or a handle not yet freed.
 */
void artqr_code_free(struct ArtqrCode *code);

/**
 * Applies a built-in stylizer given as e.g. `"posterize:4"` or `"hue:120"`.
 *
 * # Safety
 * `image` must be a live handle; `spec` a NUL-terminated string; `out` writable.
 */
enum ArtqrStatus artqr_stylize_builtin(const struct ArtqrImage *image,
                                       const char *spec,
                                       struct ArtqrImage **out);

/**
 * Corrects a stylized version of `code` at margin `delta`. `iterations` may
 * be null.
 *
 * # Safety
 * `code` and `stylized` must be live handles; `out` writable; `iterations`
 * null or writable.
 */
enum ArtqrStatus artqr_correct(const struct ArtqrCode *code,
                               const struct ArtqrImage *stylized,
                               double delta,
                               struct ArtqrImage **out,
                               uint32_t *iterations);

/**
 * Decodes `image` on the geometry of `code` and checks the payload.
 * Returns `DecodeFailed` when decoding fails or the payload differs.
 * `corrections` may be null.
 *
 * # Safety
 * `code` and `image` must be live handles; `corrections` null or writable.
 */
enum ArtqrStatus artqr_verify(const struct ArtqrCode *code,
                              const struct ArtqrImage *image,
                              uint32_t *corrections);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARTQR_H */
