#include "kolmo/reduction.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "kolmo/binary_io.hpp"
#include "kolmo/error.hpp"
#include "kolmo/parallel.hpp"

namespace kolmo {

Eigen::MatrixXd series_matrix(const SnapshotSeries& series) {
  const auto n = static_cast<Eigen::Index>(series.grid.size());
  const auto count = static_cast<Eigen::Index>(series.count());
  return Eigen::Map<const Eigen::MatrixXd>(series.values.data(), n, count);
}

SnapshotSeries matrix_series(const SnapshotSeries& like, const Eigen::MatrixXd& columns) {
  require(columns.rows() == static_cast<Eigen::Index>(like.grid.size()), ErrorKind::ShapeMismatch,
          "column length does not match the grid");
  SnapshotSeries out = like.empty_like();
  out.values.assign(columns.data(), columns.data() + columns.size());
  return out;
}

Eigen::MatrixXd PcaBasis::coefficients(const Eigen::MatrixXd& w) const {
  require(w.rows() == u.rows(), ErrorKind::ShapeMismatch, "snapshot length does not match the PCA basis");
  return u.transpose() * (w.colwise() - mean);
}

Eigen::MatrixXd PcaBasis::reconstruct(const Eigen::MatrixXd& c) const {
  require(c.rows() == u.cols(), ErrorKind::ShapeMismatch, "coefficient length does not match the PCA basis");
  return (u * c).colwise() + mean;
}

Eigen::MatrixXd PcaBasis::truncate(const Eigen::MatrixXd& w, int d) const {
  require(d >= 0 && d <= dim(), ErrorKind::InvalidArgument, "truncation rank out of range");
  const auto ud = u.leftCols(d);
  return (ud * (ud.transpose() * (w.colwise() - mean))).colwise() + mean;
}

PcaBasis fit_pca(const Eigen::MatrixXd& data, bool center) {
  require(data.cols() > 0 && data.rows() > 0, ErrorKind::EmptyData, "no snapshots to fit");
  require(data.allFinite(), ErrorKind::NonFinite, "snapshot data contains non-finite values");
  const Eigen::Index n = data.rows();
  PcaBasis basis;
  basis.centered = center;
  basis.mean = center ? Eigen::VectorXd(data.rowwise().mean()) : Eigen::VectorXd::Zero(n);
  basis.scale = data.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd x = data.colwise() - basis.mean;

  // With more snapshots than dimensions, reduce to the N x N triangular factor
  // first: X = R^T Q^T shares its left singular vectors with R^T.
  Eigen::MatrixXd target;
  if (x.cols() > n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x.transpose());
    target = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  } else {
    target = x;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(target, Eigen::ComputeFullU);
  basis.u = svd.matrixU();
  basis.singular_values = Eigen::VectorXd::Zero(n);
  basis.singular_values.head(svd.singularValues().size()) = svd.singularValues();
  require(basis.singular_values(0) > 0.0, ErrorKind::DegenerateData, "snapshot matrix has rank 0");
  if (basis.scale <= 0.0) basis.scale = 1.0;
  return basis;
}

double reconstruction_mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::ShapeMismatch, "shapes differ");
  if (a.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

void Autoencoder::validate() const {
  require(d_h >= 1 && d_h <= pca.dim(), ErrorKind::InvalidArgument, "latent dimension out of range");
  if (use_encoder) {
    require(enc.input_dim() == pca.dim() && enc.output_dim() == d_h, ErrorKind::ShapeMismatch,
            "encoder shape does not match the basis and latent dimension");
  }
  require(dec.input_dim() == d_h && dec.output_dim() == pca.dim(), ErrorKind::ShapeMismatch,
          "decoder shape does not match the basis and latent dimension");
}

Autoencoder make_autoencoder(const PcaBasis& pca, int d_h, const std::vector<int>& enc_hidden,
                             const std::vector<int>& dec_hidden, std::uint64_t seed, double alpha_l) {
  using nn::Activation;
  std::vector<int> enc_dims{pca.dim()};
  enc_dims.insert(enc_dims.end(), enc_hidden.begin(), enc_hidden.end());
  enc_dims.push_back(d_h);
  std::vector<int> dec_dims{d_h};
  dec_dims.insert(dec_dims.end(), dec_hidden.begin(), dec_hidden.end());
  dec_dims.push_back(pca.dim());
  std::vector<Activation> dec_acts(dec_dims.size() - 1, Activation::Sigmoid);
  dec_acts.back() = Activation::Linear;

  Autoencoder ae;
  ae.d_h = d_h;
  ae.pca = pca;
  ae.alpha_l = alpha_l;
  ae.enc = nn::DenseNet(enc_dims, std::vector<Activation>(enc_dims.size() - 1, Activation::Sigmoid), seed);
  ae.dec = nn::DenseNet(dec_dims, dec_acts, seed ^ 0x5bd1e995ULL);
  ae.validate();
  return ae;
}

namespace {

Eigen::MatrixXd latent_from_coefficients(const Autoencoder& ae, const Eigen::MatrixXd& c) {
  Eigen::MatrixXd h = c.topRows(ae.d_h);
  if (ae.use_encoder) {
    const double s = ae.pca.scale;
    h += s * ae.enc.forward_batch(c / s);
  }
  return h;
}

Eigen::MatrixXd coefficients_from_latent(const Autoencoder& ae, const Eigen::MatrixXd& h) {
  const double s = ae.pca.scale;
  Eigen::MatrixXd c = s * ae.dec.forward_batch(h / s);
  c.topRows(ae.d_h) += h;
  return c;
}

struct LossParts {
  double loss = 0.0;
  AeGradients grads;
};

// Works in PCA coefficient space, where ||w - w~|| = ||c - c~|| because U is
// orthogonal.
LossParts loss_on_coefficients(const Autoencoder& ae, const Eigen::MatrixXd& c, bool with_grad) {
  const double s = ae.pca.scale;
  const int dh = ae.d_h;
  const double batch = static_cast<double>(std::max<Eigen::Index>(1, c.cols()));

  nn::ForwardCache enc_cache, dec_cache;
  Eigen::MatrixXd e;
  Eigen::MatrixXd h = c.topRows(dh);
  if (ae.use_encoder) {
    e = nn::forward(ae.enc, c / s, enc_cache);
    h += s * e;
  }
  const Eigen::MatrixXd d = nn::forward(ae.dec, h / s, dec_cache);
  Eigen::MatrixXd r = s * d;
  r.topRows(dh) += h;
  r -= c;
  Eigen::MatrixXd q = s * d.topRows(dh);
  if (ae.use_encoder) q += s * e;

  LossParts out;
  out.loss = (r.squaredNorm() + ae.alpha_l * q.squaredNorm()) / batch;
  if (!with_grad) return out;

  Eigen::MatrixXd g_d = (2.0 * s / batch) * r;
  g_d.topRows(dh) += (2.0 * ae.alpha_l * s / batch) * q;
  out.grads.dec = nn::Gradients::zeros_like(ae.dec);
  const Eigen::MatrixXd g_z = nn::backward(ae.dec, dec_cache, g_d, out.grads.dec);
  if (ae.use_encoder) {
    const Eigen::MatrixXd g_h = (2.0 / batch) * r.topRows(dh) + g_z / s;
    const Eigen::MatrixXd g_e = s * g_h + (2.0 * ae.alpha_l * s / batch) * q;
    out.grads.enc = nn::Gradients::zeros_like(ae.enc);
    nn::backward(ae.enc, enc_cache, g_e, out.grads.enc);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd encode(const Autoencoder& ae, const Eigen::MatrixXd& w) {
  return latent_from_coefficients(ae, ae.pca.coefficients(w));
}

Eigen::VectorXd encode(const Autoencoder& ae, const Eigen::VectorXd& w) {
  return encode(ae, Eigen::MatrixXd(w)).col(0);
}

Eigen::MatrixXd decode(const Autoencoder& ae, const Eigen::MatrixXd& h) {
  require(h.rows() == ae.d_h, ErrorKind::ShapeMismatch,
          "latent length " + std::to_string(h.rows()) + " != " + std::to_string(ae.d_h));
  return ae.pca.reconstruct(coefficients_from_latent(ae, h));
}

Eigen::VectorXd decode(const Autoencoder& ae, const Eigen::VectorXd& h) {
  return decode(ae, Eigen::MatrixXd(h)).col(0);
}

double ae_loss(const Autoencoder& ae, const Eigen::MatrixXd& w) {
  return loss_on_coefficients(ae, ae.pca.coefficients(w), false).loss;
}

std::pair<double, AeGradients> ae_grad(const Autoencoder& ae, const Eigen::MatrixXd& w) {
  auto parts = loss_on_coefficients(ae, ae.pca.coefficients(w), true);
  return {parts.loss, std::move(parts.grads)};
}

std::pair<Autoencoder, nn::LossHistory> train_autoencoder_once(Autoencoder ae, const Eigen::MatrixXd& train,
                                                               const Eigen::MatrixXd& test,
                                                               const nn::TrainConfig& cfg) {
  cfg.validate();
  ae.validate();
  require(train.cols() > 0, ErrorKind::EmptyData, "training set is empty");
  const Eigen::MatrixXd c_train = ae.pca.coefficients(train);
  const Eigen::MatrixXd c_test = test.cols() > 0 ? ae.pca.coefficients(test) : Eigen::MatrixXd(train.rows(), 0);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  nn::Adam enc_opt(ae.enc, nn::AdamParams{cfg.lr});
  nn::Adam dec_opt(ae.dec, nn::AdamParams{cfg.lr});
  nn::LossHistory history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    enc_opt.set_lr(cfg.lr_at(epoch));
    dec_opt.set_lr(cfg.lr_at(epoch));
    double total = 0.0;
    for (const auto& batch : nn::epoch_batches(c_train.cols(), cfg.batch_size, rng)) {
      const Eigen::MatrixXd cb = c_train(Eigen::all, batch);
      auto parts = loss_on_coefficients(ae, cb, true);
      require(std::isfinite(parts.loss), ErrorKind::NonFinite,
              "autoencoder loss diverged at epoch " + std::to_string(epoch));
      total += parts.loss * static_cast<double>(batch.size());
      if (ae.use_encoder) enc_opt.step(ae.enc, parts.grads.enc);
      dec_opt.step(ae.dec, parts.grads.dec);
    }
    history.train.push_back(total / static_cast<double>(c_train.cols()));
    history.test.push_back(c_test.cols() > 0 ? loss_on_coefficients(ae, c_test, false).loss
                                             : std::numeric_limits<double>::quiet_NaN());
  }
  return {std::move(ae), std::move(history)};
}

AeTrainResult train_autoencoder(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, const AeConfig& cfg,
                                bool center) {
  require(cfg.n_models >= 1, ErrorKind::InvalidArgument, "need at least one model");
  require(test.cols() > 0, ErrorKind::EmptyData, "test set is empty");
  const PcaBasis pca = fit_pca(train, center);

  const auto count = static_cast<std::size_t>(cfg.n_models);
  std::vector<Autoencoder> models(count);
  std::vector<nn::LossHistory> histories(count);
  std::vector<double> mse(count);
  std::vector<std::uint64_t> seeds(count);
  parallel_for(count, [&](std::size_t m) {
    seeds[m] = cfg.seed_base + m;
    auto tc = cfg.train;
    tc.seed = seeds[m];
    auto ae = make_autoencoder(pca, cfg.d_h, cfg.enc_hidden, cfg.dec_hidden, seeds[m], cfg.alpha_l);
    auto [trained, history] = train_autoencoder_once(std::move(ae), train, test, tc);
    mse[m] = reconstruction_mse(test, decode(trained, encode(trained, test)));
    models[m] = std::move(trained);
    histories[m] = std::move(history);
  });

  AeTrainResult result;
  result.best_index = nn::select_best(mse);
  result.best = models[result.best_index];
  result.seeds = seeds;
  result.test_mse = mse;
  result.histories = std::move(histories);
  result.pca_test_mse = reconstruction_mse(test, pca.truncate(test, cfg.d_h));
  return result;
}

void save_pca(const std::filesystem::path& path, const PcaBasis& pca) {
  write_file_atomic(path, [&](std::ostream& os) {
    BinaryWriter w(os);
    const auto n = pca.u.rows();
    w.bytes("KPCA1");
    w.u32(kPcaVersion);
    w.u32(static_cast<std::uint32_t>(n));
    w.u8(pca.centered ? 1 : 0);
    w.f64(pca.scale);
    w.f64s({pca.singular_values.data(), static_cast<std::size_t>(n)});
    w.f64s({pca.mean.data(), static_cast<std::size_t>(n)});
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) w.f64(pca.u(i, j));
  });
}

PcaBasis load_pca(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic("KPCA1");
  r.expect_version(kPcaVersion);
  const auto n = static_cast<Eigen::Index>(r.u32());
  require(n > 0 && n <= (1 << 16), ErrorKind::Format, path.string() + ": implausible basis size");
  PcaBasis pca;
  pca.centered = r.u8() != 0;
  pca.scale = r.f64();
  pca.singular_values.resize(n);
  pca.mean.resize(n);
  pca.u.resize(n, n);
  r.f64s({pca.singular_values.data(), static_cast<std::size_t>(n)});
  r.f64s({pca.mean.data(), static_cast<std::size_t>(n)});
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) pca.u(i, j) = r.f64();
  require(r.at_end(), ErrorKind::Format, path.string() + ": trailing bytes");
  return pca;
}

void save_autoencoder(const std::filesystem::path& dir, const Autoencoder& ae, const AeBundleMeta& meta) {
  ae.validate();
  std::filesystem::create_directories(dir);
  save_pca(dir / "pca.bin", ae.pca);
  if (ae.use_encoder) save_net(dir / "enc.knet1", ae.enc);
  nn::save_net(dir / "dec.knet1", ae.dec);
  nlohmann::json j;
  j["d_h"] = ae.d_h;
  j["alpha_l"] = ae.alpha_l;
  j["use_encoder"] = ae.use_encoder;
  j["seeds"] = meta.seeds;
  j["test_mse"] = meta.test_mse;
  j["best_index"] = meta.best_index;
  j["grid"] = {{"nx", meta.grid.nx}, {"ny", meta.grid.ny}, {"alpha", meta.grid.alpha}};
  write_file_atomic(dir / "meta.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; }, false);
}

Autoencoder load_autoencoder(const std::filesystem::path& dir, AeBundleMeta* meta) {
  std::ifstream in(dir / "meta.json");
  if (!in) fail(ErrorKind::Io, "cannot open " + (dir / "meta.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, (dir / "meta.json").string() + ": " + e.what());
  }
  Autoencoder ae;
  try {
    ae.d_h = j.at("d_h").get<int>();
    ae.alpha_l = j.at("alpha_l").get<double>();
    ae.use_encoder = j.value("use_encoder", true);
    if (meta) {
      meta->seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      meta->test_mse = j.at("test_mse").get<std::vector<double>>();
      meta->best_index = j.at("best_index").get<std::size_t>();
      const auto& g = j.at("grid");
      meta->grid = Grid{g.at("nx").get<int>(), g.at("ny").get<int>(), g.at("alpha").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, (dir / "meta.json").string() + ": " + e.what());
  }
  ae.pca = load_pca(dir / "pca.bin");
  if (ae.use_encoder) ae.enc = nn::load_net(dir / "enc.knet1");
  ae.dec = nn::load_net(dir / "dec.knet1");
  ae.validate();
  return ae;
}

}  // namespace kolmo
