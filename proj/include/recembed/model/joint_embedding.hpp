#pragma once

#include <Eigen/Dense>
#include <string>

namespace recembed::model {

enum class Modality { Text, Image };

// Unit-length vector in the shared space. `degenerate` marks the documented
// zero-pre-activation case, where the vector is all zeros instead.
struct JointEmbedding {
  std::string id;
  Modality modality = Modality::Text;
  Eigen::VectorXd v;
  bool degenerate = false;
};

}  // namespace recembed::model
