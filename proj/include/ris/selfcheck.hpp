#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ris/neural.hpp"
#include "ris/rng.hpp"

namespace ris::selfcheck {

// Worst relative error between the analytic gradients of a scalar loss
// sum(upstream .* output) and central finite differences over every weight,
// bias, batch-norm scale/shift and the input. The finite-difference side
// only ever calls forward passes on value copies of the net, so it stays
// independent of the backward implementation it checks.
//
// corrupt_one_gradient exists for the mutation sensitivity test: it biases
// one analytic weight gradient before comparing, and a healthy checker must
// then report a large error.
double max_gradient_error(const neural::DenseNet& net, const neural::Mat& batch,
                          const neural::Mat& upstream, double fd_step = 1e-5,
                          bool corrupt_one_gradient = false);

// Worst relative error of the actor-through-critic chain: the gradient of
// mean(critic([s, actor(s)])) with respect to every actor parameter,
// analytic chain versus central finite differences over actor parameters.
double max_actor_chain_error(const neural::DenseNet& actor, neural::DenseNet& critic,
                             const neural::Mat& states, double fd_step = 1e-5);

// Random small network with kink-safe pre-activations for the given batch
// (relu finite differences need a margin around zero).
struct GradCheckCase {
  neural::DenseNet net;
  neural::Mat batch;
  neural::Mat upstream;
};
GradCheckCase make_gradcheck_case(RngStream& rng, bool with_bn, neural::Act hidden);

// Named release-gate checks for the check command; each returns true on
// pass and appends one human-readable detail line.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_all_checks();

}  // namespace ris::selfcheck
