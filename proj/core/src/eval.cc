// core/src/eval.cc

// Copyright 2026  The anchorsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "anchorsv/eval.h"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "anchorsv/corpus_io.h"
#include "anchorsv/error.h"
#include "anchorsv/rng.h"

namespace anchorsv {

std::vector<Vec64> ExtractEmbeddings(const ExtractorParams &extractor, const Dataset &dataset,
                                     int threads) {
  const std::size_t n = dataset.utterances.size();
  std::vector<Vec64> out(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = ForwardEmbed(extractor, dataset.utterances[i].frames);
  };
  const std::size_t nt = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n, 1));
  if (nt == 1) {
    work(0, n);
    return out;
  }
  // Every slot is written by exactly one worker; results match the serial path.
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(std::min(n, w * chunk), std::min(n, (w + 1) * chunk));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<ScoredTrial> ScoreTrials(const Dataset &dataset, std::span<const Vec64> embeddings,
                                     std::span<const Trial> trials) {
  if (embeddings.size() != dataset.utterances.size())
    Fail(ErrorKind::kShapeMismatch, "one embedding per utterance required");
  std::vector<ScoredTrial> out;
  out.reserve(trials.size());
  for (const Trial &t : trials) {
    const Vec64 &a = embeddings[dataset.IndexOf(t.utt_a)];
    const Vec64 &b = embeddings[dataset.IndexOf(t.utt_b)];
    out.push_back({t, Cosine(a, b)});
  }
  return out;
}

std::vector<ScoredTrial> ScoreTrials(const ExtractorParams &extractor, const Dataset &dataset,
                                     std::span<const Trial> trials, int threads) {
  for (const Trial &t : trials) {
    dataset.IndexOf(t.utt_a);
    dataset.IndexOf(t.utt_b);
  }
  auto embs = ExtractEmbeddings(extractor, dataset, threads);
  return ScoreTrials(dataset, embs, trials);
}

namespace {

void SplitScores(std::span<const ScoredTrial> scored, std::vector<double> *tar,
                 std::vector<double> *non) {
  for (const ScoredTrial &s : scored) (s.trial.target ? tar : non)->push_back(s.score);
}

void CheckScores(std::span<const double> tar, std::span<const double> non) {
  if (tar.empty() || non.empty())
    Fail(ErrorKind::kDegenerate, "EER needs at least one target and one nontarget trial");
  if (!AllFinite(tar) || !AllFinite(non)) Fail(ErrorKind::kNonFinite, "non-finite score");
}

// Crossing of the FAR (falling) and FRR (rising) step curves given the
// previous and current operating points.
double Crossing(double far_prev, double frr_prev, double far, double frr) {
  if (far == frr) return far;
  const double d_prev = far_prev - frr_prev;  // > 0
  const double d_cur = far - frr;             // < 0
  const double alpha = d_prev / (d_prev - d_cur);
  return far_prev + alpha * (far - far_prev);
}

}  // namespace

double ComputeEer(std::span<const double> target_scores,
                  std::span<const double> nontarget_scores) {
  CheckScores(target_scores, nontarget_scores);
  std::vector<std::pair<double, bool>> all;
  all.reserve(target_scores.size() + nontarget_scores.size());
  for (double s : target_scores) all.emplace_back(s, true);
  for (double s : nontarget_scores) all.emplace_back(s, false);
  std::sort(all.begin(), all.end());
  const double n_tar = static_cast<double>(target_scores.size());
  const double n_non = static_cast<double>(nontarget_scores.size());

  // Threshold at the lowest score: everything is accepted.
  double far_prev = 1.0, frr_prev = 0.0;
  std::size_t tar_below = 0, non_below = 0;
  std::size_t i = 0;
  while (i < all.size()) {
    // Threshold t = all[i].first.
    const double far = (n_non - static_cast<double>(non_below)) / n_non;
    const double frr = static_cast<double>(tar_below) / n_tar;
    if (far <= frr) return Crossing(far_prev, frr_prev, far, frr);
    far_prev = far;
    frr_prev = frr;
    const double s = all[i].first;
    for (; i < all.size() && all[i].first == s; ++i) (all[i].second ? tar_below : non_below)++;
  }
  // Threshold +inf: everything rejected.
  return Crossing(far_prev, frr_prev, 0.0, 1.0);
}

double ComputeEer(std::span<const ScoredTrial> scored) {
  std::vector<double> tar, non;
  SplitScores(scored, &tar, &non);
  return ComputeEer(tar, non);
}

double EerOracle(std::span<const ScoredTrial> scored) {
  std::vector<double> tar, non;
  SplitScores(scored, &tar, &non);
  CheckScores(tar, non);
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> distinct(tar);
  distinct.insert(distinct.end(), non.begin(), non.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds{-inf};
  for (std::size_t k = 0; k + 1 < distinct.size(); ++k)
    thresholds.push_back(0.5 * (distinct[k] + distinct[k + 1]));
  thresholds.push_back(inf);

  auto far_at = [&](double t) {
    if (t == inf) return 0.0;
    auto ge = non.end() - std::lower_bound(non.begin(), non.end(), t);
    return static_cast<double>(ge) / static_cast<double>(non.size());
  };
  auto frr_at = [&](double t) {
    if (t == inf) return 1.0;
    auto lt = std::lower_bound(tar.begin(), tar.end(), t) - tar.begin();
    return static_cast<double>(lt) / static_cast<double>(tar.size());
  };
  double far_prev = far_at(thresholds[0]), frr_prev = frr_at(thresholds[0]);
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    const double far = far_at(thresholds[k]), frr = frr_at(thresholds[k]);
    if (far <= frr) return Crossing(far_prev, frr_prev, far, frr);
    far_prev = far;
    frr_prev = frr;
  }
  return far_prev;  // unreachable: at +inf FAR = 0 <= FRR = 1
}

GeometryStats ComputeGeometry(std::span<const Vec64> embeddings, std::span<const int> speakers) {
  if (embeddings.size() != speakers.size())
    Fail(ErrorKind::kShapeMismatch, "one speaker label per embedding required");
  if (embeddings.empty()) Fail(ErrorKind::kDegenerate, "no embeddings");
  const std::size_t dim = embeddings[0].size();
  std::map<int, std::pair<Vec64, std::size_t>> groups;
  Vec64 global(dim, 0.0);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != dim) Fail(ErrorKind::kShapeMismatch, "embedding lengths differ");
    auto &[sum, count] = groups[speakers[i]];
    if (sum.empty()) sum.assign(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
      sum[d] += embeddings[i][d];
      global[d] += embeddings[i][d];
    }
    ++count;
  }
  if (groups.size() < 2) Fail(ErrorKind::kDegenerate, "geometry needs at least 2 speakers");
  const double n = static_cast<double>(embeddings.size());
  for (double &v : global) v /= n;
  for (auto &[spk, g] : groups)
    for (double &v : g.first) v /= static_cast<double>(g.second);

  auto sqdist = [dim](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
  };
  GeometryStats st;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    st.intra_var += sqdist(embeddings[i], groups[speakers[i]].first);
    st.total_var += sqdist(embeddings[i], global);
  }
  st.intra_var /= n;
  st.total_var /= n;
  for (const auto &[spk, g] : groups)
    st.inter_var += static_cast<double>(g.second) / n * sqdist(g.first, global);
  if (st.intra_var > 0.0) st.ratio = st.inter_var / st.intra_var;
  else st.ratio = st.inter_var > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return st;
}

std::vector<Vec64> LengthNormalized(std::span<const Vec64> embeddings) {
  std::vector<Vec64> out;
  out.reserve(embeddings.size());
  for (const Vec64 &e : embeddings) {
    const double n = Norm(e);
    if (!(n > kNormEpsilon)) Fail(ErrorKind::kZeroVector, "cannot normalize a zero embedding");
    Vec64 u(e);
    for (double &v : u) v /= n;
    out.push_back(std::move(u));
  }
  return out;
}

Projection Project2d(std::span<const Vec64> embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 3) Fail(ErrorKind::kDegenerate, "projection needs at least 3 embeddings");
  const std::size_t dim = embeddings[0].size();
  if (dim < 2) Fail(ErrorKind::kDegenerate, "projection needs embeddings of dim >= 2");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    if (embeddings[i].size() != dim) Fail(ErrorKind::kShapeMismatch, "embedding lengths differ");
    for (std::size_t d = 0; d < dim; ++d)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = embeddings[i][d];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  const double trace = cov.trace();
  if (!(trace > 0.0)) Fail(ErrorKind::kDegenerate, "all embeddings are identical");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) Fail(ErrorKind::kNonFinite, "eigendecomposition failed");
  const Eigen::Index last = static_cast<Eigen::Index>(dim) - 1;
  Eigen::MatrixXd dirs(static_cast<Eigen::Index>(dim), 2);
  dirs.col(0) = eig.eigenvectors().col(last);
  dirs.col(1) = eig.eigenvectors().col(last - 1);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    dirs.col(c).cwiseAbs().maxCoeff(&arg);
    if (dirs(arg, c) < 0) dirs.col(c) *= -1.0;
  }
  const Eigen::MatrixXd proj = x * dirs;

  Projection p;
  p.lambda1 = std::max(0.0, eig.eigenvalues()(last));
  p.lambda2 = std::max(0.0, eig.eigenvalues()(last - 1));
  p.variance_share = (p.lambda1 + p.lambda2) / trace;
  p.points.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    p.points[i] = {proj(static_cast<Eigen::Index>(i), 0), proj(static_cast<Eigen::Index>(i), 1)};
  return p;
}

Dataset RemixDataset(const Dataset &dataset, const Condition &condition, std::uint64_t seed) {
  Dataset out;
  out.n_speakers = dataset.n_speakers;
  out.split = dataset.split;
  out.dim = dataset.dim;
  out.utterances.reserve(dataset.utterances.size());
  const auto kind_index = static_cast<std::uint64_t>(condition.kind);
  for (std::size_t i = 0; i < dataset.utterances.size(); ++i) {
    const Utterance &u = dataset.utterances[i];
    if (!condition.noisy) {
      out.utterances.push_back(u);
      continue;
    }
    // The same noise draw is reused across the SNR grid for a given kind.
    const std::uint64_t ns = NoiseSeed(NoiseDomain::kEval, seed, i, kind_index);
    out.utterances.push_back(MakeNoisy(u, ns, condition.kind, condition.snr_db));
  }
  return out;
}

namespace {

std::vector<int> Labels(const Dataset &ds) {
  std::vector<int> l;
  l.reserve(ds.utterances.size());
  for (const Utterance &u : ds.utterances) l.push_back(u.speaker);
  return l;
}

}  // namespace

EvalReport FullEval(const ExtractorParams &extractor, const Dataset &test,
                    std::span<const Trial> trials, const EvalOptions &options) {
  if (options.snr_grid.empty()) Fail(ErrorKind::kInvalidArgument, "empty SNR grid");
  if (options.noise_kinds.empty()) Fail(ErrorKind::kInvalidArgument, "no noise kinds");
  EvalReport r;
  for (const Trial &t : trials) (t.target ? r.n_target : r.n_nontarget)++;
  if (r.n_target == 0 || r.n_nontarget == 0)
    Fail(ErrorKind::kDegenerate, "trial list needs both target and nontarget trials");
  const std::vector<int> labels = Labels(test);

  const std::optional<Condition> &designated = options.geometry_condition;
  std::vector<Vec64> pooled;
  std::vector<int> pooled_labels;
  auto evaluate = [&](const Dataset &ds, double *eer, GeometryStats *geo, bool pool) {
    auto embs = ExtractEmbeddings(extractor, ds, options.threads);
    *eer = ComputeEer(ScoreTrials(ds, embs, trials));
    auto unit = LengthNormalized(embs);
    *geo = ComputeGeometry(unit, labels);
    if (pool) {
      pooled.insert(pooled.end(), unit.begin(), unit.end());
      pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());
    }
  };

  evaluate(test, &r.clean_eer, &r.clean_geometry, false);
  bool have_geometry = false;
  if (designated && !designated->noisy) {
    r.noisy_geometry = r.clean_geometry;
    have_geometry = true;
  }

  double total = 0.0;
  for (NoiseKind kind : options.noise_kinds) {
    double kind_sum = 0.0;
    for (double snr : options.snr_grid) {
      EvalCell cell;
      cell.condition = Condition::Noisy(kind, snr);
      evaluate(RemixDataset(test, cell.condition, options.seed), &cell.eer, &cell.geometry,
               !designated);
      if (designated && cell.condition == *designated) {
        r.noisy_geometry = cell.geometry;
        have_geometry = true;
      }
      kind_sum += cell.eer;
      total += cell.eer;
      r.cells.push_back(cell);
    }
    r.kind_averages.emplace_back(kind, kind_sum / static_cast<double>(options.snr_grid.size()));
  }
  r.average_noisy_eer = total / static_cast<double>(r.cells.size());
  if (!designated) {
    r.geometry_source = "noisy";
    r.noisy_geometry = ComputeGeometry(pooled, pooled_labels);
  } else {
    r.geometry_source = designated->ToString();
    if (!have_geometry) {
      double unused = 0.0;
      evaluate(RemixDataset(test, *designated, options.seed), &unused, &r.noisy_geometry, false);
    }
  }
  return r;
}

namespace {

std::string RatioText(double ratio) {
  return std::isinf(ratio) ? std::string("inf") : FormatDouble(ratio);
}

nlohmann::ordered_json GeometryJson(const GeometryStats &g) {
  nlohmann::ordered_json j;
  j["inter_var"] = g.inter_var;
  j["intra_var"] = g.intra_var;
  if (std::isinf(g.ratio)) j["ratio"] = "inf";
  else j["ratio"] = g.ratio;
  j["total_var"] = g.total_var;
  return j;
}

}  // namespace

std::string EvalReport::ToCsv() const {
  std::ostringstream os;
  os << "condition,eer,inter,intra,ratio\n";
  auto row = [&os](const std::string &name, double eer, const GeometryStats &g) {
    os << name << ',' << FormatDouble(eer) << ',' << FormatDouble(g.inter_var) << ','
       << FormatDouble(g.intra_var) << ',' << RatioText(g.ratio) << '\n';
  };
  row("clean", clean_eer, clean_geometry);
  for (const EvalCell &c : cells) row(c.condition.ToString(), c.eer, c.geometry);
  return os.str();
}

std::string EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["format"] = "anchorsv-eval-1";
  j["trials"] = {{"target", n_target}, {"nontarget", n_nontarget}};
  j["clean"] = {{"eer", clean_eer}, {"geometry", GeometryJson(clean_geometry)}};
  auto &cs = j["cells"] = nlohmann::ordered_json::array();
  for (const EvalCell &c : cells) {
    nlohmann::ordered_json cj;
    cj["noise"] = NoiseKindName(c.condition.kind);
    cj["snr_db"] = c.condition.snr_db;
    cj["eer"] = c.eer;
    cj["geometry"] = GeometryJson(c.geometry);
    cs.push_back(cj);
  }
  auto &ka = j["kind_averages"] = nlohmann::ordered_json::object();
  for (const auto &[kind, avg] : kind_averages) ka[std::string(NoiseKindName(kind))] = avg;
  j["average_noisy_eer"] = average_noisy_eer;
  j["geometry_source"] = geometry_source;
  j["noisy_geometry"] = GeometryJson(noisy_geometry);
  return j.dump(2) + "\n";
}

}  // namespace anchorsv
