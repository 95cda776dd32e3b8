#include <stdio.h>
#include <stdlib.h>

#include "sinterp.h"

#define CHECK(call)                                                         \
    do {                                                                    \
        enum SinStatus s_ = (call);                                         \
        if (s_ != SIN_STATUS_OK) {                                          \
            fprintf(stderr, "%s failed: %d %s\n", #call, (int)s_,           \
                    sin_last_error_message());                              \
            return 1;                                                       \
        }                                                                   \
    } while (0)

int main(void) {
    enum { H = 33, W = 33 };
    static uint8_t pixels[H * W * 3];
    for (size_t i = 0; i < H * W; i++) {
        size_t r = i / W, c = i % W;
        pixels[3 * i + 0] = c < 16 ? 220 : 20;
        pixels[3 * i + 1] = r < 16 ? 200 : 40;
        pixels[3 * i + 2] = (uint8_t)((r * 7 + c * 3) % 64);
    }

    struct SinImage *image = NULL;
    CHECK(sin_image_from_rgb8(pixels, H, W, &image));

    struct SinSegmentOptions opts;
    CHECK(sin_segment_options_default(&opts));
    opts.seed_step = 8;
    opts.threads = 1;

    struct SinLabelMap *labels = NULL;
    CHECK(sin_segment(image, &opts, &labels));

    size_t h = 0, w = 0, count = 0;
    bool connected = false;
    CHECK(sin_label_map_dims(labels, &h, &w));
    CHECK(sin_label_map_count(labels, &count));
    CHECK(sin_check_connectivity(labels, &connected));
    if (h != H || w != W || count != 25 || !connected) {
        fprintf(stderr, "unexpected result %zux%zu count=%zu connected=%d\n", h, w, count, connected);
        return 1;
    }

    if (sin_segment(NULL, &opts, &labels) != SIN_STATUS_NULL_POINTER || sin_last_error_message() == NULL) {
        fprintf(stderr, "null image not reported\n");
        return 1;
    }

    sin_label_map_free(labels);
    sin_image_free(image);
    printf("ok\n");
    return 0;
}
