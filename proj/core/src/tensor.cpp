#include "otvm/tensor.hpp"

#include <unordered_set>
#include <vector>

namespace otvm::core {

namespace {
bool g_grad_enabled = true;
}

bool GradMode::enabled() { return g_grad_enabled; }
void GradMode::set(bool b) { g_grad_enabled = b; }

template <typename T>
void backward(const Tensor<T>& loss) {
  assert(loss.numel() == 1);
  auto root = loss.node();
  if (!root->requires_grad) return;

  // iterative post-order DFS for topological order
  std::vector<Node<T>*> topo;
  std::unordered_set<Node<T>*> seen;
  struct Frame {
    Node<T>* n;
    size_t next_child;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  seen.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_child < f.n->parents.size()) {
      Node<T>* p = f.n->parents[f.next_child++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      topo.push_back(f.n);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += T(1);
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if ((*it)->backfn) (*it)->backfn();
  }
}

template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace otvm::core
