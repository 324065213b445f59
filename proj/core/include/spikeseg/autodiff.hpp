#pragma once

#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spikeseg/kernels.hpp"
#include "spikeseg/rng.hpp"
#include "spikeseg/tensor.hpp"

namespace spikeseg {

// Reverse-mode tape. Ops append backward closures while the forward pass
// runs; backward() replays them last-to-first. Adjoints live in tape-owned
// buffers and are flushed additively into Tensor::grad at the end, so a
// second backward() without zero_grad doubles every gradient.
//
// The tape is confined to a single training thread.
template <class S>
class TapeT {
 public:
  using Closure = std::function<void(TapeT&)>;

  void record(Closure fn) { nodes_.push_back(std::move(fn)); }

  // register a tensor whose .grad should receive its adjoint after replay
  void track(const TensorPtrT<S>& t) {
    if (!t->requires_grad) return;
    if (tracked_set_.insert(t.get()).second) tracked_.push_back(t);
  }

  // zero-initialized adjoint buffer for writing
  std::vector<S>& adjoint(const TensorT<S>* t) {
    auto [it, fresh] = adjoints_.try_emplace(t);
    if (fresh) it->second.assign(t->size(), S(0));
    return it->second;
  }

  // nullptr when the tensor received no adjoint (not on any path to the loss)
  const std::vector<S>* find_adjoint(const TensorT<S>* t) const {
    auto it = adjoints_.find(t);
    return it == adjoints_.end() ? nullptr : &it->second;
  }

  void backward(const TensorPtrT<S>& loss);

  void clear() {
    nodes_.clear();
    tracked_.clear();
    tracked_set_.clear();
    adjoints_.clear();
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  std::vector<Closure> nodes_;
  std::vector<TensorPtrT<S>> tracked_;
  std::unordered_set<const TensorT<S>*> tracked_set_;
  std::unordered_map<const TensorT<S>*, std::vector<S>> adjoints_;
};

using Tape = TapeT<float>;

// All ops are pure given (inputs, rng state). Passing tape = nullptr runs
// the forward computation alone.

// input [B,Cin,H,W] x weight [Cout,Cin,k,k] -> [B,Cout,H',W']; bias-free
template <class S>
TensorPtrT<S> conv2d(TapeT<S>* tape, const TensorPtrT<S>& input, const TensorPtrT<S>& weight,
                     int stride = 1, int pad = 0);

// input [B,Cin,H,W] x weight [Cin,Cout,k,k] -> [B,Cout,(H-1)s-2p+k,...]
template <class S>
TensorPtrT<S> transposed_conv2d(TapeT<S>* tape, const TensorPtrT<S>& input,
                                const TensorPtrT<S>& weight, int stride = 1, int pad = 0);

template <class S>
TensorPtrT<S> avg_pool2d(TapeT<S>* tape, const TensorPtrT<S>& input, int window = 2);

// stacks b's channels after a's; all other dims must match
template <class S>
TensorPtrT<S> concat_channels(TapeT<S>* tape, const TensorPtrT<S>& a, const TensorPtrT<S>& b);

template <class S>
TensorPtrT<S> relu(TapeT<S>* tape, const TensorPtrT<S>& input);

template <class S>
TensorPtrT<S> sigmoid(TapeT<S>* tape, const TensorPtrT<S>& input);

// training: zero with probability `rate`, scale survivors by 1/(1-rate);
// inference: identity (returns the input tensor itself)
template <class S>
TensorPtrT<S> dropout(TapeT<S>* tape, const TensorPtrT<S>& input, double rate, bool training,
                      Rng& rng);

template <class S>
TensorPtrT<S> add(TapeT<S>* tape, const TensorPtrT<S>& a, const TensorPtrT<S>& b);

template <class S>
TensorPtrT<S> mul(TapeT<S>* tape, const TensorPtrT<S>& a, const TensorPtrT<S>& b);

template <class S>
TensorPtrT<S> scale(TapeT<S>* tape, const TensorPtrT<S>& a, S factor);

template <class S>
TensorPtrT<S> sum(TapeT<S>* tape, const TensorPtrT<S>& a);

template <class S>
TensorPtrT<S> mean(TapeT<S>* tape, const TensorPtrT<S>& a);

}  // namespace spikeseg
