#include "conflate/encoder_params.hpp"

namespace conflate {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::BoC: return "boc";
    case ModelKind::LSTM: return "lstm";
    case ModelKind::CNN: return "cnn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "boc") return ModelKind::BoC;
  if (name == "lstm") return ModelKind::LSTM;
  if (name == "cnn") return ModelKind::CNN;
  throw std::invalid_argument("unknown model kind '" + std::string(name) +
                              "' (expected boc, lstm or cnn)");
}

std::size_t EncoderDims::output_dim(ModelKind kind) const {
  switch (kind) {
    case ModelKind::BoC: return boc_hidden;
    case ModelKind::LSTM: return 2 * lstm_hidden;
    case ModelKind::CNN: return 3 * feature_maps;
  }
  return 0;
}

std::vector<TensorSpec> tensor_layout(ModelKind kind, const EncoderDims& d) {
  const std::size_t V = Vocabulary::kSize;
  switch (kind) {
    case ModelKind::BoC:
      return {{"boc.W1", d.boc_hidden, V},
              {"boc.b1", d.boc_hidden, 1},
              {"boc.W2", d.boc_hidden, d.boc_hidden},
              {"boc.b2", d.boc_hidden, 1}};
    case ModelKind::LSTM: {
      const std::size_t G = 4 * d.lstm_hidden;
      return {{"embed.W_e", d.embedding, V},
              {"lstm.fwd.W", G, d.embedding},
              {"lstm.fwd.U", G, d.lstm_hidden},
              {"lstm.fwd.b", G, 1},
              {"lstm.bwd.W", G, d.embedding},
              {"lstm.bwd.U", G, d.lstm_hidden},
              {"lstm.bwd.b", G, 1}};
    }
    case ModelKind::CNN: {
      const std::size_t F = d.feature_maps;
      return {{"embed.W_e", d.embedding, V},
              {"cnn.W2", F, 2 * d.embedding},
              {"cnn.b2", F, 1},
              {"cnn.W3", F, 3 * d.embedding},
              {"cnn.b3", F, 1},
              {"cnn.W4", F, 4 * d.embedding},
              {"cnn.b4", F, 1}};
    }
  }
  return {};
}

}  // namespace conflate
