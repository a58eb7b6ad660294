#include "fedrl/autodiff.hpp"

#include <cmath>
#include <memory>

namespace fedrl {

ValueId Tape::push(Tensor value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
  return static_cast<ValueId>(nodes_.size() - 1);
}

Tensor& Tape::ensure_grad(ValueId id) {
  Node& n = nodes_[id];
  if (n.grad.numel() == 0) n.grad = Tensor(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::reset() { nodes_.clear(); }

ValueId Tape::constant(Tensor v) { return push(std::move(v)); }

ValueId Tape::param(Parameter& p, bool accumulate) {
  Parameter* pp = &p;
  ValueId id = push(p.value);
  if (accumulate && p.trainable) {
    nodes_[id].back = [id, pp](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      for (int k = 0; k < g.numel(); ++k) pp->grad.data[k] += g.data[k];
    };
  }
  return id;
}

ValueId Tape::add(ValueId a, ValueId b) {
  const Tensor& av = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw DimensionError("add: shape mismatch");
  Tensor out = av;
  for (int k = 0; k < out.numel(); ++k) out.data[k] += bv.data[k];
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& ga = t.ensure_grad(a);
    Tensor& gb = t.ensure_grad(b);
    for (int k = 0; k < g.numel(); ++k) {
      ga.data[k] += g.data[k];
      gb.data[k] += g.data[k];
    }
  };
  return id;
}

ValueId Tape::sub(ValueId a, ValueId b) {
  const Tensor& av = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw DimensionError("sub: shape mismatch");
  Tensor out = av;
  for (int k = 0; k < out.numel(); ++k) out.data[k] -= bv.data[k];
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& ga = t.ensure_grad(a);
    Tensor& gb = t.ensure_grad(b);
    for (int k = 0; k < g.numel(); ++k) {
      ga.data[k] += g.data[k];
      gb.data[k] -= g.data[k];
    }
  };
  return id;
}

ValueId Tape::mul(ValueId a, ValueId b) {
  const Tensor& av = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw DimensionError("mul: shape mismatch");
  Tensor out = av;
  for (int k = 0; k < out.numel(); ++k) out.data[k] *= bv.data[k];
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& av = t.nodes_[a].value;
    const Tensor& bv = t.nodes_[b].value;
    Tensor& ga = t.ensure_grad(a);
    Tensor& gb = t.ensure_grad(b);
    for (int k = 0; k < g.numel(); ++k) {
      ga.data[k] += g.data[k] * bv.data[k];
      gb.data[k] += g.data[k] * av.data[k];
    }
  };
  return id;
}

ValueId Tape::affine(ValueId x, double scale, double shift) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = scale * v + shift;
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, scale](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k) gx.data[k] += scale * g.data[k];
  };
  return id;
}

ValueId Tape::relu(ValueId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& xv = t.nodes_[x].value;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k)
      if (xv.data[k] > 0.0) gx.data[k] += g.data[k];
  };
  return id;
}

ValueId Tape::tanh_(ValueId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = std::tanh(v);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& y = t.nodes_[id].value;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k) gx.data[k] += g.data[k] * (1.0 - y.data[k] * y.data[k]);
  };
  return id;
}

ValueId Tape::exp_(ValueId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = std::exp(v);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& y = t.nodes_[id].value;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k) gx.data[k] += g.data[k] * y.data[k];
  };
  return id;
}

ValueId Tape::log_(ValueId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = std::log(v);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& xv = t.nodes_[x].value;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k) gx.data[k] += g.data[k] / xv.data[k];
  };
  return id;
}

ValueId Tape::square(ValueId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = v * v;
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& xv = t.nodes_[x].value;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k) gx.data[k] += 2.0 * xv.data[k] * g.data[k];
  };
  return id;
}

ValueId Tape::clamp(ValueId x, double lo, double hi) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = v < lo ? lo : (v > hi ? hi : v);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, lo, hi](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& xv = t.nodes_[x].value;
    Tensor& gx = t.ensure_grad(x);
    for (int k = 0; k < g.numel(); ++k)
      if (xv.data[k] > lo && xv.data[k] < hi) gx.data[k] += g.data[k];
  };
  return id;
}

ValueId Tape::min_elem(ValueId a, ValueId b) {
  const Tensor& av = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw DimensionError("min_elem: shape mismatch");
  Tensor out = av;
  for (int k = 0; k < out.numel(); ++k) out.data[k] = std::min(av.data[k], bv.data[k]);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& av = t.nodes_[a].value;
    const Tensor& bv = t.nodes_[b].value;
    Tensor& ga = t.ensure_grad(a);
    Tensor& gb = t.ensure_grad(b);
    for (int k = 0; k < g.numel(); ++k) {
      if (av.data[k] <= bv.data[k])
        ga.data[k] += g.data[k];
      else
        gb.data[k] += g.data[k];
    }
  };
  return id;
}

ValueId Tape::add_rowvec(ValueId x, ValueId row) {
  const Tensor& xv = nodes_[x].value;
  const Tensor& rv = nodes_[row].value;
  if (rv.rows != 1 || rv.cols != xv.cols) throw DimensionError("add_rowvec: shape mismatch");
  Tensor out = xv;
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) += rv.data[c];
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, row](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& gx = t.ensure_grad(x);
    Tensor& gr = t.ensure_grad(row);
    for (int k = 0; k < g.numel(); ++k) gx.data[k] += g.data[k];
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) gr.data[c] += g.at(r, c);
  };
  return id;
}

ValueId Tape::broadcast_row(ValueId row, int rows) {
  const Tensor& rv = nodes_[row].value;
  if (rv.rows != 1) throw DimensionError("broadcast_row: input is not a row vector");
  Tensor out(rows, rv.cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < rv.cols; ++c) out.at(r, c) = rv.data[c];
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, row](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& gr = t.ensure_grad(row);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) gr.data[c] += g.at(r, c);
  };
  return id;
}

ValueId Tape::hstack(std::span<const ValueId> parts) {
  if (parts.empty()) throw DimensionError("hstack: no inputs");
  int rows = nodes_[parts[0]].value.rows;
  int cols = 0;
  for (ValueId p : parts) {
    if (nodes_[p].value.rows != rows) throw DimensionError("hstack: row count mismatch");
    cols += nodes_[p].value.cols;
  }
  Tensor out(rows, cols);
  int off = 0;
  for (ValueId p : parts) {
    const Tensor& v = nodes_[p].value;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < v.cols; ++c) out.at(r, off + c) = v.at(r, c);
    off += v.cols;
  }
  std::vector<ValueId> ps(parts.begin(), parts.end());
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, ps](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    int off = 0;
    for (ValueId p : ps) {
      Tensor& gp = t.ensure_grad(p);
      for (int r = 0; r < gp.rows; ++r)
        for (int c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(r, off + c);
      off += gp.cols;
    }
  };
  return id;
}

ValueId Tape::slice_cols(ValueId x, int c0, int c1) {
  const Tensor& xv = nodes_[x].value;
  if (c0 < 0 || c1 > xv.cols || c0 >= c1) throw DimensionError("slice_cols: bad range");
  Tensor out(xv.rows, c1 - c0);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = xv.at(r, c0 + c);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, c0](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& gx = t.ensure_grad(x);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) gx.at(r, c0 + c) += g.at(r, c);
  };
  return id;
}

ValueId Tape::slice_rows(ValueId x, int r0, int r1) {
  const Tensor& xv = nodes_[x].value;
  if (r0 < 0 || r1 > xv.rows || r0 >= r1) throw DimensionError("slice_rows: bad range");
  Tensor out(r1 - r0, xv.cols);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out.at(r, c) = xv.at(r0 + r, c);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, r0](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& gx = t.ensure_grad(x);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) gx.at(r0 + r, c) += g.at(r, c);
  };
  return id;
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  Tensor out = fedrl::matmul(nodes_[a].value, nodes_[b].value);
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& av = t.nodes_[a].value;
    const Tensor& bv = t.nodes_[b].value;
    Tensor da = matmul_nt(g, bv);  // g * B^T
    Tensor db = matmul_tn(av, g);  // A^T * g
    Tensor& ga = t.ensure_grad(a);
    Tensor& gb = t.ensure_grad(b);
    for (int k = 0; k < da.numel(); ++k) ga.data[k] += da.data[k];
    for (int k = 0; k < db.numel(); ++k) gb.data[k] += db.data[k];
  };
  return id;
}

ValueId Tape::rowdot(ValueId a, ValueId b) {
  const Tensor& av = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  if (!av.same_shape(bv)) throw DimensionError("rowdot: shape mismatch");
  Tensor out(av.rows, 1);
  for (int r = 0; r < av.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < av.cols; ++c) s += av.at(r, c) * bv.at(r, c);
    out.data[r] = s;
  }
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& av = t.nodes_[a].value;
    const Tensor& bv = t.nodes_[b].value;
    Tensor& ga = t.ensure_grad(a);
    Tensor& gb = t.ensure_grad(b);
    for (int r = 0; r < av.rows; ++r) {
      const double gr = g.data[r];
      for (int c = 0; c < av.cols; ++c) {
        ga.at(r, c) += gr * bv.at(r, c);
        gb.at(r, c) += gr * av.at(r, c);
      }
    }
  };
  return id;
}

ValueId Tape::mul_colvec(ValueId x, ValueId c) {
  const Tensor& xv = nodes_[x].value;
  const Tensor& cv = nodes_[c].value;
  if (cv.cols != 1 || cv.rows != xv.rows) throw DimensionError("mul_colvec: shape mismatch");
  Tensor out = xv;
  for (int r = 0; r < out.rows; ++r) {
    const double s = cv.data[r];
    for (int k = 0; k < out.cols; ++k) out.at(r, k) *= s;
  }
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, c](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& xv = t.nodes_[x].value;
    const Tensor& cv = t.nodes_[c].value;
    Tensor& gx = t.ensure_grad(x);
    Tensor& gc = t.ensure_grad(c);
    for (int r = 0; r < g.rows; ++r) {
      const double s = cv.data[r];
      double acc = 0.0;
      for (int k = 0; k < g.cols; ++k) {
        gx.at(r, k) += g.at(r, k) * s;
        acc += g.at(r, k) * xv.at(r, k);
      }
      gc.data[r] += acc;
    }
  };
  return id;
}

ValueId Tape::sum_cols(ValueId x) {
  const Tensor& xv = nodes_[x].value;
  Tensor out(xv.rows, 1);
  for (int r = 0; r < xv.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < xv.cols; ++c) s += xv.at(r, c);
    out.data[r] = s;
  }
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    Tensor& gx = t.ensure_grad(x);
    for (int r = 0; r < gx.rows; ++r)
      for (int c = 0; c < gx.cols; ++c) gx.at(r, c) += g.data[r];
  };
  return id;
}

ValueId Tape::sum_all(ValueId x) {
  const Tensor& xv = nodes_[x].value;
  double s = 0.0;
  for (double v : xv.data) s += v;
  Tensor out(1, 1);
  out.data[0] = s;
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const double g = t.nodes_[id].grad.data[0];
    Tensor& gx = t.ensure_grad(x);
    for (double& v : gx.data) v += g;
  };
  return id;
}

ValueId Tape::mean_all(ValueId x) {
  const Tensor& xv = nodes_[x].value;
  double s = 0.0;
  for (double v : xv.data) s += v;
  const int n = xv.numel();
  Tensor out(1, 1);
  out.data[0] = s / n;
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x, n](Tape& t) {
    const double g = t.nodes_[id].grad.data[0] / n;
    Tensor& gx = t.ensure_grad(x);
    for (double& v : gx.data) v += g;
  };
  return id;
}

ValueId Tape::softmax_rows(ValueId x) {
  const Tensor& xv = nodes_[x].value;
  Tensor out = xv;
  for (int r = 0; r < out.rows; ++r) {
    double mx = out.at(r, 0);
    for (int c = 1; c < out.cols; ++c) mx = std::max(mx, out.at(r, c));
    double z = 0.0;
    for (int c = 0; c < out.cols; ++c) {
      double e = std::exp(out.at(r, c) - mx);
      out.at(r, c) = e;
      z += e;
    }
    for (int c = 0; c < out.cols; ++c) out.at(r, c) /= z;
  }
  ValueId id = push(std::move(out));
  nodes_[id].back = [id, x](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& y = t.nodes_[id].value;
    Tensor& gx = t.ensure_grad(x);
    for (int r = 0; r < y.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < y.cols; ++c) dot += g.at(r, c) * y.at(r, c);
      for (int c = 0; c < y.cols; ++c) gx.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
    }
  };
  return id;
}

ValueId Tape::layer_norm_rows(ValueId x, ValueId gamma, ValueId beta, double eps) {
  const Tensor& xv = nodes_[x].value;
  const Tensor& gv = nodes_[gamma].value;
  const Tensor& bv = nodes_[beta].value;
  if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 || bv.cols != xv.cols)
    throw DimensionError("layer_norm_rows: gamma/beta shape mismatch");
  const int d = xv.cols;
  Tensor xhat(xv.rows, d);
  Tensor inv_std(xv.rows, 1);
  Tensor out(xv.rows, d);
  for (int r = 0; r < xv.rows; ++r) {
    double mu = 0.0;
    for (int c = 0; c < d; ++c) mu += xv.at(r, c);
    mu /= d;
    double var = 0.0;
    for (int c = 0; c < d; ++c) {
      double dv = xv.at(r, c) - mu;
      var += dv * dv;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std.data[r] = is;
    for (int c = 0; c < d; ++c) {
      const double xh = (xv.at(r, c) - mu) * is;
      xhat.at(r, c) = xh;
      out.at(r, c) = gv.data[c] * xh + bv.data[c];
    }
  }
  ValueId id = push(std::move(out));
  auto xh = std::make_shared<Tensor>(std::move(xhat));
  auto is = std::make_shared<Tensor>(std::move(inv_std));
  nodes_[id].back = [id, x, gamma, beta, xh, is](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& gv = t.nodes_[gamma].value;
    Tensor& gx = t.ensure_grad(x);
    Tensor& gg = t.ensure_grad(gamma);
    Tensor& gb = t.ensure_grad(beta);
    const int d = g.cols;
    for (int r = 0; r < g.rows; ++r) {
      double sum_dxh = 0.0, sum_dxh_xh = 0.0;
      for (int c = 0; c < d; ++c) {
        const double dxh = g.at(r, c) * gv.data[c];
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh->at(r, c);
        gg.data[c] += g.at(r, c) * xh->at(r, c);
        gb.data[c] += g.at(r, c);
      }
      const double isr = is->data[r];
      for (int c = 0; c < d; ++c) {
        const double dxh = g.at(r, c) * gv.data[c];
        gx.at(r, c) += isr * (dxh - (sum_dxh + xh->at(r, c) * sum_dxh_xh) / d);
      }
    }
  };
  return id;
}

ValueId Tape::batch_norm(ValueId x, ValueId gamma, ValueId beta, Tensor& running_mean,
                         Tensor& running_var, BnMode mode, double momentum, double eps) {
  const Tensor& xv = nodes_[x].value;
  const Tensor& gv = nodes_[gamma].value;
  const Tensor& bv = nodes_[beta].value;
  const int d = xv.cols;
  const int B = xv.rows;
  if (gv.cols != d || bv.cols != d || running_mean.cols != d || running_var.cols != d)
    throw DimensionError("batch_norm: feature width mismatch");

  if (mode == BnMode::kEval) {
    Tensor out(B, d);
    Tensor scale(1, d);
    for (int c = 0; c < d; ++c) scale.data[c] = gv.data[c] / std::sqrt(running_var.data[c] + eps);
    for (int r = 0; r < B; ++r)
      for (int c = 0; c < d; ++c)
        out.at(r, c) = scale.data[c] * (xv.at(r, c) - running_mean.data[c]) + bv.data[c];
    ValueId id = push(std::move(out));
    Tensor rm = running_mean;
    Tensor rv = running_var;
    auto sc = std::make_shared<Tensor>(std::move(scale));
    auto rmv = std::make_shared<std::pair<Tensor, Tensor>>(std::move(rm), std::move(rv));
    nodes_[id].back = [id, x, gamma, beta, sc, rmv, eps](Tape& t) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& xv = t.nodes_[x].value;
      Tensor& gx = t.ensure_grad(x);
      Tensor& gg = t.ensure_grad(gamma);
      Tensor& gb = t.ensure_grad(beta);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
          gx.at(r, c) += g.at(r, c) * sc->data[c];
          const double xh = (xv.at(r, c) - rmv->first.data[c]) /
                            std::sqrt(rmv->second.data[c] + eps);
          gg.data[c] += g.at(r, c) * xh;
          gb.data[c] += g.at(r, c);
        }
    };
    return id;
  }

  // Training: normalize with batch statistics (biased variance).
  Tensor mu(1, d), var(1, d);
  for (int c = 0; c < d; ++c) {
    double m = 0.0;
    for (int r = 0; r < B; ++r) m += xv.at(r, c);
    mu.data[c] = m / B;
  }
  for (int c = 0; c < d; ++c) {
    double v = 0.0;
    for (int r = 0; r < B; ++r) {
      const double dv = xv.at(r, c) - mu.data[c];
      v += dv * dv;
    }
    var.data[c] = v / B;
  }
  if (mode == BnMode::kTrain) {
    for (int c = 0; c < d; ++c) {
      running_mean.data[c] = (1.0 - momentum) * running_mean.data[c] + momentum * mu.data[c];
      running_var.data[c] = (1.0 - momentum) * running_var.data[c] + momentum * var.data[c];
    }
  }
  Tensor xhat(B, d), out(B, d), inv_std(1, d);
  for (int c = 0; c < d; ++c) inv_std.data[c] = 1.0 / std::sqrt(var.data[c] + eps);
  for (int r = 0; r < B; ++r)
    for (int c = 0; c < d; ++c) {
      const double xh = (xv.at(r, c) - mu.data[c]) * inv_std.data[c];
      xhat.at(r, c) = xh;
      out.at(r, c) = gv.data[c] * xh + bv.data[c];
    }
  ValueId id = push(std::move(out));
  auto xh = std::make_shared<Tensor>(std::move(xhat));
  auto is = std::make_shared<Tensor>(std::move(inv_std));
  nodes_[id].back = [id, x, gamma, beta, xh, is](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& gv = t.nodes_[gamma].value;
    Tensor& gx = t.ensure_grad(x);
    Tensor& gg = t.ensure_grad(gamma);
    Tensor& gb = t.ensure_grad(beta);
    const int B = g.rows, d = g.cols;
    for (int c = 0; c < d; ++c) {
      double sum_dxh = 0.0, sum_dxh_xh = 0.0;
      for (int r = 0; r < B; ++r) {
        const double dxh = g.at(r, c) * gv.data[c];
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh->at(r, c);
        gg.data[c] += g.at(r, c) * xh->at(r, c);
        gb.data[c] += g.at(r, c);
      }
      const double isc = is->data[c];
      for (int r = 0; r < B; ++r) {
        const double dxh = g.at(r, c) * gv.data[c];
        gx.at(r, c) += isc * (dxh - (sum_dxh + xh->at(r, c) * sum_dxh_xh) / B);
      }
    }
  };
  return id;
}

void Tape::backward(ValueId root) {
  if (nodes_[root].value.numel() != 1)
    throw DimensionError("backward: root must be a scalar (1x1) node");
  ensure_grad(root).data[0] = 1.0;
  for (ValueId i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back && n.grad.numel() != 0) n.back(*this);
  }
}

}  // namespace fedrl
