#pragma once

#include "dcsim/engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace dcsim {

// Flat `section.key = value` document, '#' comments.  Every key has a
// default (the defaults reproduce the reference plant parameter set); unknown
// or repeated keys are hard errors so a typo can't silently run a different
// experiment.  Values keep their source spelling, which makes the resolved
// dump and the config hash stable across runs.
class RunConfig {
public:
    static const std::map<std::string, std::string>& defaults();
    static RunConfig from_defaults();
    static RunConfig from_file(const std::string& path);
    static RunConfig from_stream(std::istream& in);

    double num(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& raw(const std::string& key) const;

    // FNV-1a 64 over the sorted resolved key=value pairs
    std::uint64_t hash() const;
    void write_resolved(std::ostream& out) const;

    // assembled parameter blocks (engineering units -> SI)
    RectifierParams rectifier() const;
    DabParams dab_params() const;
    ControlGains control() const;
    WindowParams window() const;
    MetricsParams metrics_params() const;
    ITLoadParams it_params() const;
    CoolingParams cooling_params() const;
    EssParams ess_params() const;

    bool calibrate_losses() const;
    double loss_target(ChainKind k) const;

    // Full scenario with the architecture's default (uncalibrated) chain;
    // command drivers swap in the calibrated chain.
    ScenarioConfig scenario(ChainKind arch, LoadProfile profile) const;

private:
    std::map<std::string, std::string> v_;
};

} // namespace dcsim
