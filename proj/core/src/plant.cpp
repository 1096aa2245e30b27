#include "dcsim/plant.hpp"
#include "dcsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dcsim {

void validate_chain(const ArchitectureChain& chain) {
    const std::size_t want = chain.kind == ChainKind::SST ? 2 : 5;
    if (chain.stages.size() != want)
        throw config_error("chain has " + std::to_string(chain.stages.size()) +
                           " stages, expected " + std::to_string(want));
    for (const auto& st : chain.stages) {
        if (st.c0_kw < 0.0 || st.c1 < 0.0 || st.c2_per_mw < 0.0 || st.rating_mw <= 0.0)
            throw config_error("stage '" + st.name + "': coefficients must be >= 0, rating > 0");
        for (double p : {0.1 * st.rating_mw, st.rating_mw}) {
            if (st.loss_mw(p) > 0.5 * p)
                throw config_error("stage '" + st.name + "': loss exceeds 50 % of throughput at " +
                                   std::to_string(p) + " MW");
        }
    }
}

ChainPowerResult chain_input_power(const ArchitectureChain& chain, double p_load_mw) {
    if (!(p_load_mw >= 0.0) || !std::isfinite(p_load_mw))
        throw data_error("chain_input_power: load must be finite and >= 0");
    ChainPowerResult r;
    r.stage_loss_mw.assign(chain.stages.size(), 0.0);
    double p = p_load_mw;
    // walk load -> grid, report grid -> load
    for (std::size_t i = chain.stages.size(); i-- > 0;) {
        const double loss = chain.stages[i].loss_mw(p);
        r.stage_loss_mw[i] = loss;
        p += loss;
    }
    r.p_input_mw = p;
    r.p_loss_mw = p - p_load_mw;
    return r;
}

double chain_avg_loss_ratio(const ArchitectureChain& chain, const std::vector<double>& p_load_mw) {
    double e_in = 0.0, e_loss = 0.0;
    for (double p : p_load_mw) {
        const auto r = chain_input_power(chain, p);
        e_in += r.p_input_mw;
        e_loss += r.p_loss_mw;
    }
    if (!(e_in > 0.0)) throw data_error("loss ratio undefined: zero input energy");
    return e_loss / e_in;
}

namespace {

ArchitectureChain scaled(const ArchitectureChain& chain, double s) {
    ArchitectureChain c = chain;
    for (auto& st : c.stages) {
        st.c0_kw *= s;
        st.c1 *= s;
        st.c2_per_mw *= s;
    }
    return c;
}

} // namespace

CalibrationResult calibrate_chain(const ArchitectureChain& chain,
                                  double target_ratio,
                                  const std::vector<double>& p_load_mw) {
    if (!(target_ratio > 0.0) || !(target_ratio < 0.5))
        throw config_error("calibration target must be in (0, 0.5)");
    if (p_load_mw.empty())
        throw data_error("calibration needs a non-empty load series");

    auto ratio_at = [&](double s) { return chain_avg_loss_ratio(scaled(chain, s), p_load_mw); };

    double lo = 0.0, hi = 1.0;
    int it = 0;
    while (ratio_at(hi) < target_ratio) {
        lo = hi;
        hi *= 2.0;
        if (++it > 60) throw config_error("calibration target unreachable");
    }
    double mid = hi;
    for (int i = 0; i < 100; ++i) {
        mid = 0.5 * (lo + hi);
        if (ratio_at(mid) < target_ratio) lo = mid;
        else hi = mid;
        ++it;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }

    CalibrationResult res;
    res.scale = 0.5 * (lo + hi);
    res.chain = scaled(chain, res.scale);
    res.achieved_ratio = chain_avg_loss_ratio(res.chain, p_load_mw);
    res.iterations = it;
    if (std::fabs(res.achieved_ratio - target_ratio) > 1e-4)
        throw config_error("calibration did not converge to target within 1e-4");
    validate_chain(res.chain);
    return res;
}

std::vector<double> profile_to_mw(const LoadProfile& p) {
    std::vector<double> mw(p.samples_kw.size());
    for (std::size_t i = 0; i < mw.size(); ++i) mw[i] = p.samples_kw[i] / 1000.0;
    return mw;
}

SocStepResult ess_soc_step(const EssParams& e, double soc,
                           double p_ch_mw, double p_dis_mw, double dt_s) {
    if (p_ch_mw < 0.0 || p_dis_mw < 0.0)
        throw data_error("ess_soc_step: powers must be >= 0");
    if (p_ch_mw > 0.0 && p_dis_mw > 0.0)
        throw data_error("ess_soc_step: cannot charge and discharge simultaneously");
    if (!(e.e_rated_mwh > 0.0) || !(e.eps_ch > 0.0) || !(e.eps_dis > 0.0))
        throw config_error("ess parameters must be > 0");

    const double d_mwh = (e.eps_ch * p_ch_mw - p_dis_mw / e.eps_dis) * (dt_s / 3600.0);
    double s2 = soc + d_mwh / e.e_rated_mwh;
    SocStepResult r;
    if (s2 > e.soc_max) { s2 = e.soc_max; r.clamped = true; }
    if (s2 < e.soc_min) { s2 = e.soc_min; r.clamped = true; }
    r.soc = s2;
    return r;
}

// Default coefficient sets.  Proportional terms follow typical double-
// conversion UPS stage efficiencies (2.5/1/1/2.5/2.5 %) and the two-stage
// MV rectifier + DAB path (0.8/1.0 %); standby burn 0.5 % (UPS) and 0.05 %
// (SST) of rating per stage.  The small quadratic term models conduction
// loss and is what makes input energy sensitive to load fluctuation; the
// whole vector is rescaled by calibrate_chain before use.
ArchitectureChain default_sst_chain(double rating_mw) {
    ArchitectureChain c;
    c.kind = ChainKind::SST;
    const double c0 = 0.0005 * rating_mw * 1000.0;
    c.stages = {
        {"mv_rectifier", c0, 0.008, 0.0005 / rating_mw * 2.25, rating_mw},
        {"dab", c0, 0.010, 0.0005 / rating_mw * 2.25, rating_mw},
    };
    validate_chain(c);
    return c;
}

ArchitectureChain default_ups_chain(double rating_mw) {
    ArchitectureChain c;
    c.kind = ChainKind::UPS;
    const double c0 = 0.005 * rating_mw * 1000.0;
    const double c2 = 0.004 / rating_mw * 2.25;
    c.stages = {
        {"input_inverter", c0, 0.025, c2, rating_mw},
        {"step_up_tr", c0, 0.010, c2, rating_mw},
        {"step_down_tr", c0, 0.010, c2, rating_mw},
        {"rectifier", c0, 0.025, c2, rating_mw},
        {"output_inverter", c0, 0.025, c2, rating_mw},
    };
    validate_chain(c);
    return c;
}

} // namespace dcsim
