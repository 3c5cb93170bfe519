#include "sensi/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "sensi/errors.hpp"
#include "sensi/kahan.hpp"

namespace sensi {

Eigen::MatrixXd& ParamSet::add(const std::string& name, long rows, long cols) {
    if (has(name)) throw std::logic_error("duplicate parameter tensor: " + name);
    if (rows < 0 || cols < 0) throw std::logic_error("negative tensor shape: " + name);
    entries_.push_back({name, Eigen::MatrixXd::Zero(rows, cols)});
    return entries_.back().value;
}

Eigen::MatrixXd& ParamSet::at(const std::string& name) {
    for (Entry& e : entries_)
        if (e.name == name) return e.value;
    throw std::logic_error("unknown parameter tensor: " + name);
}

const Eigen::MatrixXd& ParamSet::at(const std::string& name) const {
    for (const Entry& e : entries_)
        if (e.name == name) return e.value;
    throw std::logic_error("unknown parameter tensor: " + name);
}

bool ParamSet::has(const std::string& name) const {
    for (const Entry& e : entries_)
        if (e.name == name) return true;
    return false;
}

std::size_t ParamSet::total_size() const {
    std::size_t n = 0;
    for (const Entry& e : entries_) n += static_cast<std::size_t>(e.value.size());
    return n;
}

std::size_t ParamSet::locate(std::size_t flat, std::size_t* offset) const {
    std::size_t base = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        std::size_t span = static_cast<std::size_t>(entries_[i].value.size());
        if (flat < base + span) {
            *offset = flat - base;
            return i;
        }
        base += span;
    }
    throw std::out_of_range("parameter index out of range");
}

double ParamSet::scalar(std::size_t flat) const {
    std::size_t off = 0;
    std::size_t i = locate(flat, &off);
    return entries_[i].value.data()[off];
}

void ParamSet::set_scalar(std::size_t flat, double value) {
    std::size_t off = 0;
    std::size_t i = locate(flat, &off);
    entries_[i].value.data()[off] = value;
}

std::string ParamSet::describe(std::size_t flat) const {
    std::size_t off = 0;
    std::size_t i = locate(flat, &off);
    const Eigen::MatrixXd& m = entries_[i].value;
    long r = static_cast<long>(off) % m.rows();
    long c = static_cast<long>(off) / m.rows();
    return entries_[i].name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    for (const Entry& e : entries_) out.add(e.name, e.value.rows(), e.value.cols());
    return out;
}

void ParamSet::set_zero() {
    for (Entry& e : entries_) e.value.setZero();
}

bool ParamSet::same_layout(const ParamSet& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name != other.entries_[i].name) return false;
        if (entries_[i].value.rows() != other.entries_[i].value.rows()) return false;
        if (entries_[i].value.cols() != other.entries_[i].value.cols()) return false;
    }
    return true;
}

void RecurrentConfig::validate() const {
    window.validate();
    if (hidden < 1) throw ValidationError("hidden size must be at least 1");
    if (static_dim < 0 || past_dim < 0 || known_dim < 0)
        throw ValidationError("feature dimensions must be non-negative");
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ValidationError("epochs must be non-negative");
    if (batch_size < 1) throw ValidationError("batch size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("learning rate must be positive and finite");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct GruRefs {
    const Eigen::MatrixXd &Wz, &Uz, &bz, &Wr, &Ur, &br, &Wh, &Uh, &bh;
};

struct GruGradRefs {
    Eigen::MatrixXd &Wz, &Uz, &bz, &Wr, &Ur, &br, &Wh, &Uh, &bh;
};

GruRefs gru_refs(const ParamSet& p, const std::string& prefix) {
    return {p.at(prefix + ".Wz"), p.at(prefix + ".Uz"), p.at(prefix + ".bz"),
            p.at(prefix + ".Wr"), p.at(prefix + ".Ur"), p.at(prefix + ".br"),
            p.at(prefix + ".Wh"), p.at(prefix + ".Uh"), p.at(prefix + ".bh")};
}

GruGradRefs gru_grad_refs(ParamSet& p, const std::string& prefix) {
    return {p.at(prefix + ".Wz"), p.at(prefix + ".Uz"), p.at(prefix + ".bz"),
            p.at(prefix + ".Wr"), p.at(prefix + ".Ur"), p.at(prefix + ".br"),
            p.at(prefix + ".Wh"), p.at(prefix + ".Uh"), p.at(prefix + ".bh")};
}

struct GruTrace {
    std::vector<Eigen::VectorXd> z, r, hbar, h;
    void reserve(int steps) {
        z.reserve(steps);
        r.reserve(steps);
        hbar.reserve(steps);
        h.reserve(steps);
    }
};

Eigen::VectorXd gru_step(const GruRefs& g, const Eigen::VectorXd& u, const Eigen::VectorXd& hprev,
                         GruTrace& trace) {
    Eigen::VectorXd z = (g.Wz * u + g.Uz * hprev + g.bz.col(0)).unaryExpr([](double x) { return sigmoid(x); });
    Eigen::VectorXd r = (g.Wr * u + g.Ur * hprev + g.br.col(0)).unaryExpr([](double x) { return sigmoid(x); });
    Eigen::VectorXd hbar =
        (g.Wh * u + g.Uh * r.cwiseProduct(hprev) + g.bh.col(0)).unaryExpr([](double x) { return std::tanh(x); });
    Eigen::VectorXd h = (Eigen::VectorXd::Ones(z.size()) - z).cwiseProduct(hprev) + z.cwiseProduct(hbar);
    trace.z.push_back(std::move(z));
    trace.r.push_back(std::move(r));
    trace.hbar.push_back(std::move(hbar));
    trace.h.push_back(h);
    return h;
}

// Backward through one GRU step. dh is the loss gradient at this step's
// output; returns the gradient at hprev and writes the input gradient.
Eigen::VectorXd gru_backward_step(const GruRefs& g, GruGradRefs& gg, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& hprev, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& r, const Eigen::VectorXd& hbar,
                                  const Eigen::VectorXd& dh, Eigen::VectorXd* du) {
    Eigen::ArrayXd zA = z.array();
    Eigen::VectorXd dz = dh.cwiseProduct(hbar - hprev);
    Eigen::VectorXd daz = (dz.array() * zA * (1.0 - zA)).matrix();
    Eigen::VectorXd dhbar = dh.cwiseProduct(z);
    Eigen::VectorXd dah = (dhbar.array() * (1.0 - hbar.array().square())).matrix();
    Eigen::VectorXd dhprev = dh.cwiseProduct(Eigen::VectorXd::Ones(z.size()) - z);

    gg.Wh += dah * u.transpose();
    gg.Uh += dah * r.cwiseProduct(hprev).transpose();
    gg.bh.col(0) += dah;
    Eigen::VectorXd drh = g.Uh.transpose() * dah;
    Eigen::VectorXd dr = drh.cwiseProduct(hprev);
    dhprev += drh.cwiseProduct(r);
    Eigen::VectorXd dar = (dr.array() * r.array() * (1.0 - r.array())).matrix();

    gg.Wr += dar * u.transpose();
    gg.Ur += dar * hprev.transpose();
    gg.br.col(0) += dar;
    dhprev += g.Ur.transpose() * dar;

    gg.Wz += daz * u.transpose();
    gg.Uz += daz * hprev.transpose();
    gg.bz.col(0) += daz;
    dhprev += g.Uz.transpose() * daz;

    *du = g.Wz.transpose() * daz + g.Wr.transpose() * dar + g.Wh.transpose() * dah;
    return dhprev;
}

struct Tape {
    Eigen::VectorXd context;              // tanh static encoding, also both initial hidden states
    std::vector<Eigen::VectorXd> enc_raw; // concatenated per-step encoder features
    std::vector<Eigen::VectorXd> enc_in;  // projected encoder inputs
    GruTrace enc;
    std::vector<Eigen::VectorXd> dec_in;  // projected decoder inputs
    GruTrace dec;
    std::vector<Eigen::VectorXd> act, gate;
    Eigen::VectorXd yhat;
    double y_anchor = 0.0;
};

Tape run_forward(const ParamSet& P, const RecurrentConfig& cfg, const WindowSample& s) {
    const int k = cfg.window.lag_days;
    const int tau = cfg.window.horizon_days;
    const int Dp = cfg.past_dim;
    const int Dk = cfg.known_dim;

    const Eigen::MatrixXd& Ws = P.at("static.W");
    const Eigen::MatrixXd& bs = P.at("static.b");
    const Eigen::MatrixXd& Win = P.at("enc_in.W");
    const Eigen::MatrixXd& bin = P.at("enc_in.b");
    const Eigen::MatrixXd& Wd = P.at("dec_in.W");
    const Eigen::MatrixXd& bd = P.at("dec_in.b");
    GruRefs enc = gru_refs(P, "enc");
    GruRefs dec = gru_refs(P, "dec");
    const Eigen::MatrixXd& Wa = P.at("head.Wa");
    const Eigen::MatrixXd& ba = P.at("head.ba");
    const Eigen::MatrixXd& Wg = P.at("head.Wg");
    const Eigen::MatrixXd& bg = P.at("head.bg");
    const Eigen::MatrixXd& wo = P.at("head.wo");
    const double bo = P.at("head.bo")(0, 0);
    const double wskip = P.at("head.wskip")(0, 0);

    Tape t;
    t.context = (Ws * s.static_features + bs.col(0)).unaryExpr([](double x) { return std::tanh(x); });
    t.enc_raw.reserve(k);
    t.enc_in.reserve(k);
    t.enc.reserve(k);
    Eigen::VectorXd h = t.context;
    for (int p = 0; p < k; ++p) {
        Eigen::VectorXd e(1 + Dp + Dk);
        e[0] = s.past_target[p];
        if (Dp > 0) e.segment(1, Dp) = s.past_dynamic.row(p).transpose();
        if (Dk > 0) e.segment(1 + Dp, Dk) = s.known_future.row(p).transpose();
        Eigen::VectorXd u = Win * e + bin.col(0) + t.context;
        h = gru_step(enc, u, h, t.enc);
        t.enc_raw.push_back(std::move(e));
        t.enc_in.push_back(std::move(u));
    }

    t.dec_in.reserve(tau);
    t.dec.reserve(tau);
    t.act.reserve(tau);
    t.gate.reserve(tau);
    t.yhat.resize(tau);
    t.y_anchor = s.past_target[k - 1];
    Eigen::VectorXd g = h;
    for (int j = 0; j < tau; ++j) {
        Eigen::VectorXd x = s.known_future.row(k + j).transpose();
        Eigen::VectorXd v = Wd * x + bd.col(0) + t.context;
        g = gru_step(dec, v, g, t.dec);
        Eigen::VectorXd a = Wa * g + ba.col(0);
        Eigen::VectorXd gate =
            (Wg * g + bg.col(0)).unaryExpr([](double x2) { return sigmoid(x2); });
        t.yhat[j] = wo.col(0).dot(a.cwiseProduct(gate)) + bo + wskip * t.y_anchor;
        t.dec_in.push_back(std::move(v));
        t.act.push_back(std::move(a));
        t.gate.push_back(std::move(gate));
    }
    return t;
}

}  // namespace

ParamSet RecurrentForecaster::make_layout(const RecurrentConfig& cfg) {
    const int H = cfg.hidden;
    const int E = 1 + cfg.past_dim + cfg.known_dim;
    ParamSet p;
    p.add("static.W", H, cfg.static_dim);
    p.add("static.b", H, 1);
    p.add("enc_in.W", H, E);
    p.add("enc_in.b", H, 1);
    for (const char* prefix : {"enc", "dec"}) {
        std::string q(prefix);
        if (q == "dec") {
            p.add("dec_in.W", H, cfg.known_dim);
            p.add("dec_in.b", H, 1);
        }
        p.add(q + ".Wz", H, H);
        p.add(q + ".Uz", H, H);
        p.add(q + ".bz", H, 1);
        p.add(q + ".Wr", H, H);
        p.add(q + ".Ur", H, H);
        p.add(q + ".br", H, 1);
        p.add(q + ".Wh", H, H);
        p.add(q + ".Uh", H, H);
        p.add(q + ".bh", H, 1);
    }
    p.add("head.Wa", H, H);
    p.add("head.ba", H, 1);
    p.add("head.Wg", H, H);
    p.add("head.bg", H, 1);
    p.add("head.wo", H, 1);
    p.add("head.bo", 1, 1);
    p.add("head.wskip", 1, 1);
    return p;
}

RecurrentForecaster::RecurrentForecaster(RecurrentConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    params_ = make_layout(cfg_);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t i = 0; i < params_.tensor_count(); ++i) {
        const std::string& name = params_.name_of(i);
        Eigen::MatrixXd& m = params_.tensor(i);
        std::string leaf = name.substr(name.find('.') + 1);
        if (name == "head.wskip" || name == "head.bo") {
            m.setZero();
            continue;
        }
        double scale;
        if (!leaf.empty() && leaf[0] == 'b') {
            m.setZero();
            continue;
        } else if (name == "head.wo") {
            scale = 0.01;
        } else {
            scale = m.cols() > 0 ? std::sqrt(1.0 / static_cast<double>(std::max<long>(m.cols(), 1))) : 0.0;
        }
        for (long idx = 0; idx < m.size(); ++idx) m.data()[idx] = scale * unit(rng);
    }
}

RecurrentForecaster::RecurrentForecaster(RecurrentConfig cfg, ParamSet params) : cfg_(cfg) {
    cfg_.validate();
    ParamSet expected = make_layout(cfg_);
    if (!expected.same_layout(params))
        throw ValidationError("parameter set does not match the model configuration");
    params_ = std::move(params);
}

void RecurrentForecaster::set_scaler(Scaler scaler) { scaler_ = std::move(scaler); }

const Scaler& RecurrentForecaster::scaler() const {
    if (!scaler_) throw Error("no scaler attached to the forecaster");
    return *scaler_;
}

Eigen::VectorXd RecurrentForecaster::forward_std(const WindowSample& std_sample) const {
    require_sample_shape(std_sample, cfg_.window, cfg_.static_dim, cfg_.past_dim, cfg_.known_dim);
    return run_forward(params_, cfg_, std_sample).yhat;
}

double RecurrentForecaster::loss_std(const WindowSample& std_sample) const {
    Eigen::VectorXd yhat = forward_std(std_sample);
    return (yhat - std_sample.future_target).squaredNorm() / static_cast<double>(yhat.size());
}

Eigen::VectorXd RecurrentForecaster::predict(const WindowSample& sample) const {
    const Scaler& sc = scaler();
    WindowSample std_sample = sc.transform(sample);
    return sc.inverse_target(forward_std(std_sample));
}

double RecurrentForecaster::loss_and_gradient(const WindowSample& std_sample, ParamSet& grad) const {
    require_sample_shape(std_sample, cfg_.window, cfg_.static_dim, cfg_.past_dim, cfg_.known_dim);
    if (!grad.same_layout(params_))
        throw ValidationError("gradient accumulator does not match the parameter layout");
    const int k = cfg_.window.lag_days;
    const int tau = cfg_.window.horizon_days;
    Tape t = run_forward(params_, cfg_, std_sample);

    const Eigen::MatrixXd& Wa = params_.at("head.Wa");
    const Eigen::MatrixXd& Wg = params_.at("head.Wg");
    const Eigen::MatrixXd& wo = params_.at("head.wo");
    GruRefs enc = gru_refs(params_, "enc");
    GruRefs dec = gru_refs(params_, "dec");

    Eigen::MatrixXd& gWs = grad.at("static.W");
    Eigen::MatrixXd& gbs = grad.at("static.b");
    Eigen::MatrixXd& gWin = grad.at("enc_in.W");
    Eigen::MatrixXd& gbin = grad.at("enc_in.b");
    Eigen::MatrixXd& gWd = grad.at("dec_in.W");
    Eigen::MatrixXd& gbd = grad.at("dec_in.b");
    GruGradRefs genc = gru_grad_refs(grad, "enc");
    GruGradRefs gdec = gru_grad_refs(grad, "dec");
    Eigen::MatrixXd& gWa = grad.at("head.Wa");
    Eigen::MatrixXd& gba = grad.at("head.ba");
    Eigen::MatrixXd& gWg = grad.at("head.Wg");
    Eigen::MatrixXd& gbg = grad.at("head.bg");
    Eigen::MatrixXd& gwo = grad.at("head.wo");
    Eigen::MatrixXd& gbo = grad.at("head.bo");
    Eigen::MatrixXd& gwskip = grad.at("head.wskip");

    double loss = (t.yhat - std_sample.future_target).squaredNorm() / static_cast<double>(tau);

    const int H = cfg_.hidden;
    Eigen::VectorXd dcontext = Eigen::VectorXd::Zero(H);
    std::vector<Eigen::VectorXd> dg_head(tau, Eigen::VectorXd::Zero(H));
    for (int j = 0; j < tau; ++j) {
        double dyhat = 2.0 * (t.yhat[j] - std_sample.future_target[j]) / static_cast<double>(tau);
        Eigen::VectorXd eta = t.act[j].cwiseProduct(t.gate[j]);
        gwo.col(0) += dyhat * eta;
        gbo(0, 0) += dyhat;
        gwskip(0, 0) += dyhat * t.y_anchor;
        Eigen::VectorXd deta = dyhat * wo.col(0);
        Eigen::VectorXd da = deta.cwiseProduct(t.gate[j]);
        Eigen::VectorXd dgate = deta.cwiseProduct(t.act[j]);
        Eigen::VectorXd dagate =
            (dgate.array() * t.gate[j].array() * (1.0 - t.gate[j].array())).matrix();
        const Eigen::VectorXd& gj = t.dec.h[static_cast<std::size_t>(j)];
        gWa += da * gj.transpose();
        gba.col(0) += da;
        gWg += dagate * gj.transpose();
        gbg.col(0) += dagate;
        dg_head[static_cast<std::size_t>(j)] = Wa.transpose() * da + Wg.transpose() * dagate;
    }

    Eigen::VectorXd h_enc_last = t.enc.h[static_cast<std::size_t>(k - 1)];
    Eigen::VectorXd dcarry = Eigen::VectorXd::Zero(H);
    for (int j = tau - 1; j >= 0; --j) {
        Eigen::VectorXd dh_total = dg_head[static_cast<std::size_t>(j)] + dcarry;
        const Eigen::VectorXd& gprev = j == 0 ? h_enc_last : t.dec.h[static_cast<std::size_t>(j - 1)];
        Eigen::VectorXd dv;
        dcarry = gru_backward_step(dec, gdec, t.dec_in[static_cast<std::size_t>(j)], gprev,
                                   t.dec.z[static_cast<std::size_t>(j)], t.dec.r[static_cast<std::size_t>(j)],
                                   t.dec.hbar[static_cast<std::size_t>(j)], dh_total, &dv);
        Eigen::VectorXd x = std_sample.known_future.row(k + j).transpose();
        gWd += dv * x.transpose();
        gbd.col(0) += dv;
        dcontext += dv;
    }

    for (int p = k - 1; p >= 0; --p) {
        const Eigen::VectorXd& hprev = p == 0 ? t.context : t.enc.h[static_cast<std::size_t>(p - 1)];
        Eigen::VectorXd du;
        dcarry = gru_backward_step(enc, genc, t.enc_in[static_cast<std::size_t>(p)], hprev,
                                   t.enc.z[static_cast<std::size_t>(p)], t.enc.r[static_cast<std::size_t>(p)],
                                   t.enc.hbar[static_cast<std::size_t>(p)], dcarry, &du);
        gWin += du * t.enc_raw[static_cast<std::size_t>(p)].transpose();
        gbin.col(0) += du;
        dcontext += du;
    }
    dcontext += dcarry;  // the encoder's initial hidden state is the context itself

    Eigen::VectorXd dpre = (dcontext.array() * (1.0 - t.context.array().square())).matrix();
    gWs += dpre * std_sample.static_features.transpose();
    gbs.col(0) += dpre;
    return loss;
}

TrainResult train_model(RecurrentForecaster& model, const std::vector<WindowSample>& train_samples,
                        const std::vector<WindowSample>& val_samples, const TrainConfig& cfg) {
    cfg.validate();
    TrainResult result;
    if (cfg.epochs == 0) return result;
    if (train_samples.empty()) throw ValidationError("no training windows");
    if (val_samples.empty()) throw ValidationError("no validation windows");
    const Scaler& sc = model.scaler();

    std::vector<WindowSample> train;
    train.reserve(train_samples.size());
    for (const WindowSample& s : train_samples) train.push_back(sc.transform(s));
    std::vector<WindowSample> val;
    val.reserve(val_samples.size());
    for (const WindowSample& s : val_samples) val.push_back(sc.transform(s));

    ParamSet grad = model.params().zeros_like();
    ParamSet m_state = model.params().zeros_like();
    ParamSet v_state = model.params().zeros_like();
    ParamSet best_params = model.params();
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long adam_step = 0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);

    double best_val = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        KahanSum epoch_loss;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            grad.set_zero();
            KahanSum batch_loss;
            for (std::size_t i = start; i < stop; ++i)
                batch_loss.add(model.loss_and_gradient(train[order[i]], grad));
            double denom = static_cast<double>(stop - start);
            if (!std::isfinite(batch_loss.value()))
                throw Error("training diverged at epoch " + std::to_string(epoch) +
                            ": non-finite loss; lower the learning rate");
            epoch_loss.add(batch_loss.value());
            ++adam_step;
            double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step));
            double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step));
            for (std::size_t ti = 0; ti < grad.tensor_count(); ++ti) {
                Eigen::ArrayXXd g = grad.tensor(ti).array() / denom;
                m_state.tensor(ti).array() = beta1 * m_state.tensor(ti).array() + (1.0 - beta1) * g;
                v_state.tensor(ti).array() = beta2 * v_state.tensor(ti).array() + (1.0 - beta2) * g.square();
                model.params().tensor(ti).array() -=
                    cfg.learning_rate * (m_state.tensor(ti).array() / c1) /
                    ((v_state.tensor(ti).array() / c2).sqrt() + eps);
            }
        }

        KahanSum val_sq;
        long val_cells = 0;
        for (const WindowSample& s : val) {
            Eigen::VectorXd yhat = model.forward_std(s);
            val_sq.add((yhat - s.future_target).squaredNorm());
            val_cells += yhat.size();
        }
        double val_rmse = std::sqrt(val_sq.value() / static_cast<double>(val_cells));
        if (!std::isfinite(val_rmse))
            throw Error("training diverged at epoch " + std::to_string(epoch) +
                        ": non-finite validation error");
        if (val_rmse < best_val) {
            best_val = val_rmse;
            result.best_epoch = epoch;
            best_params = model.params();
            bad_epochs = 0;
        } else {
            ++bad_epochs;
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss.value() / static_cast<double>(train.size());
        stats.val_rmse = val_rmse;
        stats.best_val_rmse = best_val;
        result.history.push_back(stats);
        if (cfg.patience > 0 && bad_epochs >= cfg.patience) break;
    }
    model.params() = best_params;
    result.best_val_rmse = best_val;
    return result;
}

ParamSet analytic_gradient(const RecurrentForecaster& model, const WindowSample& std_sample) {
    ParamSet grad = model.params().zeros_like();
    model.loss_and_gradient(std_sample, grad);
    return grad;
}

ParamSet fd_gradient(RecurrentForecaster& model, const WindowSample& std_sample,
                     const std::vector<std::size_t>& indices, double step) {
    if (!(step > 0.0)) throw ValidationError("finite difference step must be positive");
    ParamSet numeric = model.params().zeros_like();
    for (std::size_t flat : indices) {
        double saved = model.params().scalar(flat);
        model.params().set_scalar(flat, saved + step);
        double up = model.loss_std(std_sample);
        model.params().set_scalar(flat, saved - step);
        double down = model.loss_std(std_sample);
        model.params().set_scalar(flat, saved);
        numeric.set_scalar(flat, (up - down) / (2.0 * step));
    }
    return numeric;
}

GradCheckReport compare_gradients(const ParamSet& analytic, const ParamSet& numeric,
                                  const std::vector<std::size_t>& indices, double tolerance) {
    if (!analytic.same_layout(numeric))
        throw ValidationError("gradient sets have different layouts");
    GradCheckReport report;
    report.passed = true;
    for (std::size_t flat : indices) {
        GradCheckEntry entry;
        entry.param = analytic.describe(flat);
        entry.analytic = analytic.scalar(flat);
        entry.numeric = numeric.scalar(flat);
        double denom = std::max({std::abs(entry.analytic), std::abs(entry.numeric), 1e-6});
        entry.rel_error = std::abs(entry.analytic - entry.numeric) / denom;
        report.max_rel_error = std::max(report.max_rel_error, entry.rel_error);
        if (!(entry.rel_error < tolerance)) report.passed = false;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

GradCheckReport gradient_check(RecurrentForecaster& model, const WindowSample& std_sample,
                               int num_params, double tolerance, double step, std::uint64_t seed) {
    std::size_t total = model.params().total_size();
    std::vector<std::size_t> indices(total);
    std::iota(indices.begin(), indices.end(), 0);
    if (num_params > 0 && static_cast<std::size_t>(num_params) < total) {
        std::mt19937_64 rng(seed);
        std::shuffle(indices.begin(), indices.end(), rng);
        indices.resize(static_cast<std::size_t>(num_params));
        std::sort(indices.begin(), indices.end());
    }
    ParamSet analytic = analytic_gradient(model, std_sample);
    ParamSet numeric = fd_gradient(model, std_sample, indices, step);
    return compare_gradients(analytic, numeric, indices, tolerance);
}

}  // namespace sensi
