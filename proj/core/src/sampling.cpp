// SPDX-License-Identifier: Apache-2.0
#include "rmap/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "rmap/error.hpp"

namespace rmap {

namespace {

// Draws k of the given cells without replacement (partial Fisher-Yates),
// then returns them with their ground-truth values, sorted by coordinate.
SparseSamples draw_cells(const Grid& gt, std::vector<Coord>& pool,
                         std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.next_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  SparseSamples out;
  out.coords.assign(pool.begin(), pool.begin() + k);
  std::sort(out.coords.begin(), out.coords.end());
  out.psd.reserve(k);
  for (const Coord& p : out.coords) out.psd.push_back(gt.at(p.row, p.col));
  return out;
}

std::size_t sample_count(double ratio, std::size_t cells) {
  return static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(cells)));
}

void check_ratio(double ratio, const char* what) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    fail(ErrorKind::parameter, std::string(what) + " must be in (0, 1], got " +
                                   std::to_string(ratio));
  }
}

SparseSamples merge_sorted(SparseSamples a, const SparseSamples& b) {
  for (int i = 0; i < b.count(); ++i) {
    a.coords.push_back(b.coords[i]);
    a.psd.push_back(b.psd[i]);
  }
  std::vector<std::size_t> order(a.coords.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a.coords[x] < a.coords[y];
  });
  SparseSamples out;
  out.coords.reserve(order.size());
  out.psd.reserve(order.size());
  for (std::size_t i : order) {
    out.coords.push_back(a.coords[i]);
    out.psd.push_back(a.psd[i]);
  }
  return out;
}

}  // namespace

SparseSamples sample_uniform(const Grid& ground_truth, double ratio,
                             Rng& rng) {
  validate_grid(ground_truth, "sample_uniform ground truth");
  check_ratio(ratio, "sampling ratio");
  if (ratio * static_cast<double>(ground_truth.size()) < 1.0) {
    fail(ErrorKind::parameter, "sampling ratio selects fewer than one cell");
  }
  std::vector<Coord> pool;
  pool.reserve(ground_truth.size());
  for (int r = 0; r < ground_truth.height; ++r) {
    for (int c = 0; c < ground_truth.width; ++c) {
      pool.push_back({r, c});
    }
  }
  const std::size_t k = sample_count(ratio, pool.size());
  return draw_cells(ground_truth, pool, k, rng);
}

SparseSamples sample_unbalanced(const Grid& ground_truth, double ratio_lo,
                                double ratio_hi, Rng& rng) {
  validate_grid(ground_truth, "sample_unbalanced ground truth");
  check_ratio(ratio_lo, "ratio_lo");
  check_ratio(ratio_hi, "ratio_hi");
  if (ratio_lo > ratio_hi) {
    fail(ErrorKind::parameter, "ratio_lo exceeds ratio_hi");
  }
  const double ratio = rng.uniform(ratio_lo, ratio_hi);
  return sample_uniform(ground_truth, ratio, rng);
}

SparseSamples sample_split(const Grid& ground_truth, double ratio_a,
                           double ratio_b, Rng& rng) {
  validate_grid(ground_truth, "sample_split ground truth");
  if (ratio_a < 0.0 || ratio_a > 1.0 || ratio_b < 0.0 || ratio_b > 1.0) {
    fail(ErrorKind::parameter, "side ratios must be in [0, 1]");
  }
  if (ratio_a == 0.0 && ratio_b == 0.0) {
    fail(ErrorKind::parameter, "at least one side ratio must be positive");
  }
  const double angle = rng.uniform(0.0, 3.14159265358979323846);
  const double dir_x = std::cos(angle);  // x = col, y = row
  const double dir_y = std::sin(angle);
  const double cx = (ground_truth.width - 1) / 2.0;
  const double cy = (ground_truth.height - 1) / 2.0;

  std::vector<Coord> side_a;
  std::vector<Coord> side_b;
  for (int r = 0; r < ground_truth.height; ++r) {
    for (int c = 0; c < ground_truth.width; ++c) {
      const double cross = (c - cx) * dir_y - (r - cy) * dir_x;
      (cross < 0.0 ? side_a : side_b).push_back({r, c});
    }
  }

  SparseSamples picked_a;
  if (!side_a.empty() && ratio_a > 0.0) {
    picked_a = draw_cells(ground_truth, side_a,
                          sample_count(ratio_a, side_a.size()), rng);
  }
  SparseSamples picked_b;
  if (!side_b.empty() && ratio_b > 0.0) {
    picked_b = draw_cells(ground_truth, side_b,
                          sample_count(ratio_b, side_b.size()), rng);
  }
  return merge_sorted(std::move(picked_a), picked_b);
}

SuperpixelLabels superpixels(const Grid& feature, int n_segments,
                             double compactness, int iters) {
  validate_grid(feature, "superpixels feature grid");
  const int h = feature.height;
  const int w = feature.width;
  const std::size_t cells = feature.size();
  if (n_segments < 1 || static_cast<std::size_t>(n_segments) > cells) {
    fail(ErrorKind::parameter,
         "n_segments must be in [1, cells], got " + std::to_string(n_segments));
  }
  if (!(compactness > 0.0)) {
    fail(ErrorKind::parameter, "compactness must be positive");
  }
  if (iters < 0) {
    fail(ErrorKind::parameter, "iters must be non-negative");
  }

  const double s = std::sqrt(static_cast<double>(cells) / n_segments);
  const double value_scale = 1.0 / compactness;

  // Regular seed lattice with ceil(n/sr) columns; trailing lattice slots
  // beyond n_segments stay unused.
  int seed_rows = std::max(
      1, static_cast<int>(std::llround(
             std::sqrt(static_cast<double>(n_segments) * h / std::max(1, w)))));
  seed_rows = std::min(seed_rows, n_segments);
  const int seed_cols = (n_segments + seed_rows - 1) / seed_rows;

  struct Center {
    double v, r, c;  // scaled feature coordinates
  };
  std::vector<Center> centers(static_cast<std::size_t>(n_segments));
  for (int i = 0; i < n_segments; ++i) {
    const int gr = i / seed_cols;
    const int gc = i % seed_cols;
    const int sr = std::min(
        h - 1, static_cast<int>((gr + 0.5) * h / seed_rows));
    const int sc = std::min(
        w - 1, static_cast<int>((gc + 0.5) * w / seed_cols));
    centers[i] = {feature.at(sr, sc) * value_scale, sr / s, sc / s};
  }

  std::vector<int> labels(cells, 0);
  const auto assign = [&]() {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double fv = feature.at(r, c) * value_scale;
        const double fr = r / s;
        const double fc = c / s;
        double best = std::numeric_limits<double>::infinity();
        int best_label = 0;
        for (int k = 0; k < n_segments; ++k) {
          const double dv = fv - centers[k].v;
          const double dr = fr - centers[k].r;
          const double dc = fc - centers[k].c;
          const double d2 = dv * dv + dr * dr + dc * dc;
          if (d2 < best) {
            best = d2;
            best_label = k;
          }
        }
        labels[static_cast<std::size_t>(r) * w + c] = best_label;
      }
    }
  };

  assign();
  for (int it = 0; it < iters; ++it) {
    std::vector<double> sum_v(n_segments, 0.0), sum_r(n_segments, 0.0),
        sum_c(n_segments, 0.0);
    std::vector<int> count(n_segments, 0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int k = labels[static_cast<std::size_t>(r) * w + c];
        sum_v[k] += feature.at(r, c) * value_scale;
        sum_r[k] += r / s;
        sum_c[k] += c / s;
        ++count[k];
      }
    }
    for (int k = 0; k < n_segments; ++k) {
      if (count[k] > 0) {  // empty clusters keep their previous center
        centers[k] = {sum_v[k] / count[k], sum_r[k] / count[k],
                      sum_c[k] / count[k]};
      }
    }
    assign();
  }

  // Connectivity: find 4-connected same-label components in scan order.
  std::vector<int> comp(cells, -1);
  struct Component {
    int label;
    std::vector<int> members;  // flat indices, ascending
  };
  std::vector<Component> comps;
  for (std::size_t start = 0; start < cells; ++start) {
    if (comp[start] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.push_back({labels[start], {}});
    std::deque<std::size_t> queue{start};
    comp[start] = id;
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      comps[id].members.push_back(static_cast<int>(i));
      const int r = static_cast<int>(i) / w;
      const int c = static_cast<int>(i) % w;
      const int nbr[4][2] = {{r - 1, c}, {r, c - 1}, {r, c + 1}, {r + 1, c}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
        const std::size_t j = static_cast<std::size_t>(n[0]) * w + n[1];
        if (comp[j] < 0 && labels[j] == labels[start]) {
          comp[j] = id;
          queue.push_back(j);
        }
      }
    }
    std::sort(comps[id].members.begin(), comps[id].members.end());
  }

  // Keep the largest component of each label (first in scan order on ties);
  // merge every other component into an adjacent already-final component.
  std::vector<int> keeper_of_label(static_cast<std::size_t>(n_segments), -1);
  for (std::size_t id = 0; id < comps.size(); ++id) {
    int& keeper = keeper_of_label[comps[id].label];
    if (keeper < 0 ||
        comps[id].members.size() > comps[keeper].members.size()) {
      keeper = static_cast<int>(id);
    }
  }
  std::vector<int> final_label(comps.size(), -1);
  for (std::size_t id = 0; id < comps.size(); ++id) {
    if (keeper_of_label[comps[id].label] == static_cast<int>(id)) {
      final_label[id] = comps[id].label;
    }
  }
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t id = 0; id < comps.size(); ++id) {
      if (final_label[id] >= 0) continue;
      // first member neighbor (up, left, right, down order) with a final label
      int adopted = -1;
      for (const int i : comps[id].members) {
        const int r = i / w;
        const int c = i % w;
        const int nbr[4][2] = {{r - 1, c}, {r, c - 1}, {r, c + 1}, {r + 1, c}};
        for (const auto& n : nbr) {
          if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
          const int nid = comp[static_cast<std::size_t>(n[0]) * w + n[1]];
          if (nid != static_cast<int>(id) && final_label[nid] >= 0) {
            adopted = final_label[nid];
            break;
          }
        }
        if (adopted >= 0) break;
      }
      if (adopted >= 0) {
        final_label[id] = adopted;
        progress = true;
      }
    }
  }

  // Compact the surviving label ids, preserving ascending order.
  std::vector<int> remap(static_cast<std::size_t>(n_segments), -1);
  int next = 0;
  for (int k = 0; k < n_segments; ++k) {
    if (keeper_of_label[k] >= 0) remap[k] = next++;
  }

  SuperpixelLabels out;
  out.height = h;
  out.width = w;
  out.n_labels = next;
  out.labels.assign(cells, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    out.labels[i] = remap[final_label[comp[i]]];
  }
  return out;
}

SparseSamples geometric_downsample(const SparseSamples& samples,
                                   const SuperpixelLabels& labels) {
  validate_samples(samples, labels.height, labels.width);
  if (labels.n_labels <= 0 ||
      labels.labels.size() !=
          static_cast<std::size_t>(labels.height) * labels.width) {
    fail(ErrorKind::validation, "geometric_downsample: malformed labels");
  }

  // Peak observation per label; ties go to the smallest row-major index.
  std::vector<int> best(static_cast<std::size_t>(labels.n_labels), -1);
  for (int i = 0; i < samples.count(); ++i) {
    const Coord p = samples.coords[i];
    const int l = labels.label(p.row, p.col);
    int& b = best[l];
    if (b < 0 || samples.psd[i] > samples.psd[b] ||
        (samples.psd[i] == samples.psd[b] &&
         samples.coords[i] < samples.coords[b])) {
      b = i;
    }
  }

  SparseSamples out;
  for (int l = 0; l < labels.n_labels; ++l) {
    if (best[l] < 0) continue;
    out.coords.push_back(samples.coords[best[l]]);
    out.psd.push_back(samples.psd[best[l]]);
  }
  return out;
}

std::vector<FreqBin> high_freq_indices(int height, int width, int n_f) {
  if (height <= 0 || width <= 0) {
    fail(ErrorKind::parameter, "high_freq_indices: non-positive shape");
  }
  const std::size_t cells =
      static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (n_f < 1 || static_cast<std::size_t>(n_f) > cells) {
    fail(ErrorKind::parameter,
         "n_f must be in [1, cells], got " + std::to_string(n_f));
  }
  std::vector<FreqBin> bins;
  bins.reserve(cells);
  for (int u = 0; u < height; ++u) {
    for (int v = 0; v < width; ++v) {
      bins.push_back({u, v});
    }
  }
  const auto radial2 = [&](const FreqBin& b) {
    const double fu = folded_frequency(b.u, height);
    const double fv = folded_frequency(b.v, width);
    return fu * fu + fv * fv;
  };
  std::stable_sort(bins.begin(), bins.end(),
                   [&](const FreqBin& a, const FreqBin& b) {
                     const double ra = radial2(a);
                     const double rb = radial2(b);
                     if (ra != rb) return ra > rb;
                     return a < b;
                   });
  bins.resize(static_cast<std::size_t>(n_f));
  return bins;
}

FreqSelection high_freq_select(const Grid& map, int n_f) {
  FreqSelection sel;
  sel.height = map.height;
  sel.width = map.width;
  sel.bins = high_freq_indices(map.height, map.width, n_f);
  const auto spectrum = dft2(map);
  sel.coeffs.reserve(sel.bins.size());
  for (const FreqBin& b : sel.bins) {
    sel.coeffs.push_back(
        spectrum[static_cast<std::size_t>(b.u) * map.width + b.v]);
  }
  return sel;
}

}  // namespace rmap
