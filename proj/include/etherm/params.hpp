#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace etherm {

/// Raised when a parameter set, scenario or grid fails validation.
/// `field` carries the offending field path (e.g. "params.c_stack").
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when an algebraic relation is evaluated outside its domain
/// (negative Tafel argument, inverted LMTD ends).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Physical, geometric and electrochemical constants of the plant.
/// SI units except temperatures (degC); delays in seconds.
struct SystemParams {
    int n_cells = 26;
    int n_parallel = 2;
    double cell_area = 0.196;  // m^2

    double u_rev = 1.229;  // V
    double u_th = 1.482;   // V

    // U-I curve
    double r1 = 1.71e-4;     // ohm m^2
    double r2 = -1.96e-7;    // ohm m^2 / K
    double s_tafel = 0.16;   // V
    double t1 = -0.24;       // m^2 / A
    double t2 = 26.23;       // m^2 K / A
    double t3 = 139.88;      // m^2 K^2 / A

    double c_stack = 120e3;  // J/K
    double c_sep = 146e3;    // J/K
    double c_cool = 23e3;    // J/K

    double lye_specific_heat = 3100.0;   // J/(kg K)
    double lye_density = 1280.0;         // kg/m^3
    double lye_flow = 0.5 / 3600.0;      // m^3/s
    double cool_specific_heat = 4180.0;  // J/(kg K)
    double cool_density = 1000.0;        // kg/m^3
    double k_valve = 5.95e-5;            // m^3/s at full opening

    double ka_coil = 140.0;           // W/K
    double r_sep = 0.04;              // K/W
    double stack_surface_area = 1.1;  // m^2
    double stack_diameter = 0.61;     // m
    double emissivity = 0.8;
    double stefan_boltzmann = 5.670374419e-8;  // W/(m^2 K^4)

    double tau1 = 360.0;  // s, stack transport delay
    double tau2 = 240.0;  // s, cooling delay

    // Informational only; carried for completeness, unused by the model.
    double void_fraction = 0.5;
    double electrode_volume = 0.03;  // m^3
    double free_volume = 0.05;       // m^3
    double separator_liquid_level = 0.5;
    double koh_mass_fraction = 0.312;

    /// Lye heat-capacity flow c*v*rho through the stack, W/K.
    double lye_capacity_flow() const { return lye_specific_heat * lye_flow * lye_density; }

    /// Throws ValidationError naming the first violated constraint.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ValidationError(std::string("params.") + name, "must be finite and > 0");
        };
        auto non_negative = [](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ValidationError(std::string("params.") + name, "must be finite and >= 0");
        };
        auto finite = [](double v, const char* name) {
            if (!std::isfinite(v))
                throw ValidationError(std::string("params.") + name, "must be finite");
        };
        if (n_cells < 1) throw ValidationError("params.n_cells", "must be >= 1");
        if (n_parallel < 1) throw ValidationError("params.n_parallel", "must be >= 1");
        if (n_cells % n_parallel != 0)
            throw ValidationError("params.n_parallel", "must divide n_cells");
        positive(cell_area, "cell_area");
        finite(u_rev, "u_rev");
        finite(u_th, "u_th");
        finite(r1, "r1");
        finite(r2, "r2");
        finite(s_tafel, "s_tafel");
        finite(t1, "t1");
        finite(t2, "t2");
        finite(t3, "t3");
        positive(c_stack, "c_stack");
        positive(c_sep, "c_sep");
        positive(c_cool, "c_cool");
        positive(lye_specific_heat, "lye_specific_heat");
        positive(lye_density, "lye_density");
        positive(lye_flow, "lye_flow");
        positive(cool_specific_heat, "cool_specific_heat");
        positive(cool_density, "cool_density");
        positive(k_valve, "k_valve");
        positive(ka_coil, "ka_coil");
        positive(r_sep, "r_sep");
        positive(stack_surface_area, "stack_surface_area");
        positive(stack_diameter, "stack_diameter");
        if (!(emissivity >= 0.0 && emissivity <= 1.0))
            throw ValidationError("params.emissivity", "must lie in [0, 1]");
        non_negative(stefan_boltzmann, "stefan_boltzmann");
        non_negative(tau1, "tau1");
        non_negative(tau2, "tau2");
    }
};

/// Lumped temperatures, degC.
struct ThermalState {
    double t_stack = 0.0;
    double t_sep = 0.0;
    double t_cool = 0.0;

    bool finite() const {
        return std::isfinite(t_stack) && std::isfinite(t_sep) && std::isfinite(t_cool);
    }
};

/// Time derivative of a ThermalState, K/s.
struct ThermalRates {
    double d_stack = 0.0;
    double d_sep = 0.0;
    double d_cool = 0.0;

    double norm() const { return std::sqrt(d_stack * d_stack + d_sep * d_sep + d_cool * d_cool); }
};

struct ExogenousInputs {
    double current = 0.0;    // A, terminal current
    double t_amb = 25.0;     // degC
    double t_cool_in = 30.0; // degC
    double t_aim = 80.0;     // degC, set point
};

struct AlgebraicOutputs {
    double u_cell = 0.0;       // V
    double q_ele = 0.0;        // W
    double q_dis_stack = 0.0;  // W
    double q_dis_sep = 0.0;    // W
    double lmtd = 0.0;         // K
};

}  // namespace etherm
