#pragma once

#include "proad/datagen.hpp"
#include "proad/model.hpp"
#include "proad/trainer.hpp"

namespace fixture {

// 32 px images, 16 patches, C = 16: small enough for exhaustive checks.
inline proad::ModelConfig tiny_model(int decoder_layers = 2) {
  proad::ModelConfig c;
  c.image_size = 32;
  c.encoder.dim = 16;
  c.encoder.num_layers = 4;
  c.encoder.fuse_from = 2;
  c.encoder.fuse_to = 3;
  c.decoder_layers = decoder_layers;
  return c;
}

inline proad::DatasetSpec tiny_data() {
  proad::DatasetSpec spec;
  spec.num_classes = 1;
  spec.train_per_class = 8;
  spec.test_normal_per_class = 3;
  spec.test_anomalous_per_class = 3;
  spec.image_size = 32;
  return spec;
}

inline proad::TrainConfig tiny_train(int epochs = 2) {
  proad::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 4;
  t.lr = 1e-3;
  t.warmup_epochs = 0;
  return t;
}

}  // namespace fixture
