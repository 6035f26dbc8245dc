#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qtomo.h"

#define CHECK(call)                                                            \
  do {                                                                         \
    QtomoStatus s_ = (call);                                                   \
    if (s_ != QTOMO_STATUS_OK) {                                               \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, qtomo_last_error());   \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  QtomoChannel *ch = NULL;
  QtomoState *st = NULL;
  QtomoReconstruction *rec = NULL;
  double m[9], chi[3], re[4], im[4];

  CHECK(qtomo_channel_from_spec("amplitude-damping:0.3", 2, &ch));
  CHECK(qtomo_state_from_spec("maximally-mixed", 2, &st));
  CHECK(qtomo_reconstruct_exact(st, ch, &rec));
  if (qtomo_reconstruction_size(rec) != 3)
    return 2;
  CHECK(qtomo_reconstruction_m(rec, m, 9));
  CHECK(qtomo_reconstruction_chi(rec, chi, 3));
  if (fabs(m[8] - 0.7) > 1e-9 || qtomo_reconstruction_delta_m(rec) > 1e-9)
    return 3;
  for (size_t k = 0; k < qtomo_reconstruction_kraus_count(rec); k++)
    CHECK(qtomo_reconstruction_kraus_op(rec, k, re, im, 4));

  if (qtomo_channel_from_spec("no-such-channel", 2, &ch) != QTOMO_STATUS_INVALID_ARGUMENT)
    return 4;
  if (qtomo_last_error() == NULL || strlen(qtomo_last_error()) == 0)
    return 5;

  qtomo_reconstruction_free(rec);
  qtomo_state_free(st);
  qtomo_channel_free(ch);
  printf("ok %s\n", qtomo_version());
  return 0;
}
