#include "hysteresis/model.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace hysteresis {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 5> kVariantNames{{
    {Variant::BishopLinear, "bishop-linear"},
    {Variant::BishopQuadratic, "bishop-quadratic"},
    {Variant::BishopCubic, "bishop-cubic"},
    {Variant::ReidLinear, "reid-linear"},
    {Variant::ReidCubic, "reid-cubic"},
}};

Nonlinearity nonlinearity_of(Variant v) {
  switch (v) {
    case Variant::BishopQuadratic:
      return Nonlinearity::Quadratic;
    case Variant::BishopCubic:
    case Variant::ReidCubic:
      return Nonlinearity::Cubic;
    default:
      return Nonlinearity::None;
  }
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ModelError(message);
}

double number_or(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& value = j.at(key);
  if (!value.is_number()) throw ModelError(std::string("field '") + key + "' must be a number");
  return value.get<double>();
}

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [variant, name] : kVariantNames)
    if (variant == v) return name;
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  for (const auto& [variant, label] : kVariantNames)
    if (label == name) return variant;
  throw ModelError("unknown model variant '" + std::string(name) + "'");
}

bool is_bishop(Variant v) {
  return v == Variant::BishopLinear || v == Variant::BishopQuadratic || v == Variant::BishopCubic;
}

bool is_reid(Variant v) { return v == Variant::ReidLinear || v == Variant::ReidCubic; }

double BishopParams::natural_frequency() const { return std::sqrt(stiffness / mass); }

const BishopParams& ModelSpec::bishop() const {
  if (!is_bishop(variant) || !std::holds_alternative<BishopParams>(params))
    throw ModelError("expected a Bishop model, got " + std::string(to_string(variant)));
  return std::get<BishopParams>(params);
}

const ReidParams& ModelSpec::reid() const {
  if (!is_reid(variant) || !std::holds_alternative<ReidParams>(params))
    throw ModelError("expected a Reid model, got " + std::string(to_string(variant)));
  return std::get<ReidParams>(params);
}

void ModelSpec::validate() const {
  if (is_bishop(variant)) {
    require(std::holds_alternative<BishopParams>(params), "Bishop variant carries Reid parameters");
    const auto& p = std::get<BishopParams>(params);
    require(std::isfinite(p.mass) && p.mass > 0.0, "mass must be positive");
    require(std::isfinite(p.stiffness) && p.stiffness > 0.0, "stiffness k must be positive");
    require(std::isfinite(p.hysteretic) && p.hysteretic >= 0.0, "hysteretic coefficient h must be >= 0");
    require(std::isfinite(p.epsilon) && p.epsilon >= 0.0, "epsilon must be >= 0");
    require(p.nonlinearity == nonlinearity_of(variant), "nonlinearity kind does not match variant");
    if (forcing) {
      require(std::isfinite(forcing->omega) && forcing->omega > 0.0, "forcing omega must be positive");
      require(forcing->waveform == Waveform::ComplexExponential,
              "Bishop models use complex-exponential forcing");
    }
  } else {
    require(std::holds_alternative<ReidParams>(params), "Reid variant carries Bishop parameters");
    const auto& p = std::get<ReidParams>(params);
    require(std::isfinite(p.mass) && p.mass > 0.0, "mass must be positive");
    require(std::isfinite(p.stiffness) && p.stiffness > 0.0, "stiffness k must be positive");
    require(std::isfinite(p.damping) && p.damping >= 0.0, "damping c must be >= 0");
    require(std::isfinite(p.epsilon) && p.epsilon >= 0.0, "epsilon must be >= 0");
    require(variant == Variant::ReidCubic || p.epsilon == 0.0, "reid-linear requires epsilon = 0");
    if (forcing) {
      require(std::isfinite(forcing->omega) && forcing->omega > 0.0, "forcing omega must be positive");
      require(forcing->waveform == Waveform::Sine, "Reid models use sine forcing");
      require(forcing->amplitude.imag() == 0.0, "Reid forcing amplitude must be real");
    }
  }
  if (variant == Variant::BishopLinear)
    require(std::get<BishopParams>(params).epsilon == 0.0, "bishop-linear requires epsilon = 0");
}

ModelSpec make_bishop(Variant variant, double k, double h, double epsilon,
                      std::optional<ForcingSpec> forcing, double mass) {
  if (!is_bishop(variant)) throw ModelError("make_bishop: not a Bishop variant");
  ModelSpec spec;
  spec.variant = variant;
  spec.params = BishopParams{mass, k, h, epsilon, nonlinearity_of(variant)};
  if (forcing) forcing->waveform = Waveform::ComplexExponential;
  spec.forcing = forcing;
  spec.validate();
  return spec;
}

ModelSpec make_reid(Variant variant, double c, double k, double epsilon, std::optional<double> f,
                    double omega, double mass) {
  if (!is_reid(variant)) throw ModelError("make_reid: not a Reid variant");
  ModelSpec spec;
  spec.variant = variant;
  spec.params = ReidParams{mass, c, k, epsilon};
  if (f) spec.forcing = ForcingSpec{Complex(*f, 0.0), omega, Waveform::Sine};
  spec.validate();
  return spec;
}

Complex rhs_bishop(const ModelSpec& spec, double t, Complex x, Complex /*v*/) {
  const BishopParams& p = spec.bishop();
  Complex force = -Complex(p.stiffness, p.hysteretic) * x;
  switch (p.nonlinearity) {
    case Nonlinearity::Quadratic:
      force -= p.epsilon * x * x;
      break;
    case Nonlinearity::Cubic:
      force -= p.epsilon * x * x * x;
      break;
    case Nonlinearity::None:
      break;
  }
  if (spec.forcing) force += spec.forcing->amplitude * std::polar(1.0, spec.forcing->omega * t);
  return force / p.mass;
}

double rhs_reid_mode(const ReidParams& p, const std::optional<ForcingSpec>& forcing, double t,
                     double x, int sign_xv) {
  double force = -p.stiffness * x - p.damping * x * sign_xv - p.epsilon * x * x * x;
  if (forcing) force += forcing->amplitude.real() * std::sin(forcing->omega * t);
  return force / p.mass;
}

double rhs_reid(const ModelSpec& spec, double t, double x, double v) {
  return rhs_reid_mode(spec.reid(), spec.forcing, t, x, sgn(x * v));
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["variant"] = std::string(to_string(spec.variant));
  if (is_bishop(spec.variant)) {
    const auto& p = spec.bishop();
    j["M"] = p.mass;
    j["k"] = p.stiffness;
    j["h"] = p.hysteretic;
    j["epsilon"] = p.epsilon;
  } else {
    const auto& p = spec.reid();
    j["M"] = p.mass;
    j["k"] = p.stiffness;
    j["c"] = p.damping;
    j["epsilon"] = p.epsilon;
  }
  if (spec.forcing) {
    j["forcing"] = {{"f", spec.forcing->amplitude.real()},
                    {"g", spec.forcing->amplitude.imag()},
                    {"omega", spec.forcing->omega}};
  }
  return j;
}

ModelSpec model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("model spec must be a JSON object");
  if (!j.contains("variant") || !j.at("variant").is_string())
    throw ModelError("model spec requires a string field 'variant'");
  const Variant variant = variant_from_string(j.at("variant").get<std::string>());
  const double mass = number_or(j, "M", 1.0);
  const double k = number_or(j, "k", 1.0);
  const double epsilon = number_or(j, "epsilon", 0.0);

  std::optional<ForcingSpec> forcing;
  if (j.contains("forcing") && !j.at("forcing").is_null()) {
    const auto& fj = j.at("forcing");
    if (!fj.is_object()) throw ModelError("field 'forcing' must be an object");
    ForcingSpec fs;
    fs.amplitude = Complex(number_or(fj, "f", 0.0), number_or(fj, "g", 0.0));
    if (!fj.contains("omega")) throw ModelError("forcing requires 'omega'");
    fs.omega = number_or(fj, "omega", 0.0);
    fs.waveform = is_bishop(variant) ? Waveform::ComplexExponential : Waveform::Sine;
    forcing = fs;
  }

  ModelSpec spec;
  spec.variant = variant;
  spec.forcing = forcing;
  if (is_bishop(variant)) {
    double h = number_or(j, "h", 0.0);
    if (!j.contains("h") && j.contains("mu")) h = number_or(j, "mu", 0.0) * k;
    spec.params = BishopParams{mass, k, h, epsilon, nonlinearity_of(variant)};
  } else {
    spec.params = ReidParams{mass, number_or(j, "c", 0.0), k, epsilon};
  }
  spec.validate();
  return spec;
}

}  // namespace hysteresis
