#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mclink/link.hpp"
#include "mclink/receiver.hpp"
#include "mclink/transmitter.hpp"

namespace mclink {

/// Parse or validation failure, anchored to a line of the scenario document.
class ScenarioError : public std::invalid_argument {
public:
    ScenarioError(const std::string& origin, int line, int column, const std::string& msg);
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

enum class ChannelMethod { exact, appro1, appro2 };

/// Straight reacting channel driven by one inlet pulse, probed at several lengths.
struct ChannelStudy {
    std::optional<RectPulse> rect;
    std::optional<GaussPulse> gauss;
    ReactionSpec reaction;
    ChannelMethod method = ChannelMethod::exact;
    std::vector<double> lengths;  ///< [m]
};

struct GridSettings {
    double dx = 2e-6;         ///< oracle spacing [m]
    double cfl = 0.25;
    double t_max = 0.0;       ///< [s]; 0 derives the horizon from the pipeline
    double sample_dt = 1e-3;  ///< analytic trace spacing [s]
};

/// One design row sharing the base transmitter geometry.
struct TxVariant {
    std::string label;
    TransmitterDesign design;
    std::optional<OptimizerTolerances> optimizer;
};

struct TxSettings {
    TransmitterDesign design;
    std::optional<OptimizerTolerances> optimizer;
    bool generate = true;  ///< run the Reaction III oracle for the bit stream
    std::vector<TxVariant> variants;  ///< empty means the base design alone
    std::vector<double> reaction1_probe_times;  ///< [s] after the Reaction I inlet
};

struct RxSettings {
    ReceiverDesign design;
    Method method = Method::appro1;
    std::optional<GaussPulse> received_pulse;
    QuadratureConfig quadrature;
};

struct Scenario {
    std::string name;
    std::string origin;        ///< file path or label used in messages
    std::string source_text;   ///< document as read, for hashing
    FlowEnv env;
    GridSettings grid;
    std::optional<ChannelStudy> channel;
    std::optional<TxSettings> tx;
    std::optional<double> channel_length;  ///< propagation channel between tx and rx [m]
    std::optional<RxSettings> rx;
    std::vector<Bit> bits;
    std::vector<std::string> probes;  ///< exported probe names; empty exports all
};

/// Replaces the scalar at a dotted path (list elements by index) before validation.
struct Override {
    std::string path;
    double value{};
};

Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                             const std::vector<Override>& overrides = {});
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<Override>& overrides = {});

}  // namespace mclink
