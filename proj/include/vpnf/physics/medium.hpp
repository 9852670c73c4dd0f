#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"

namespace vpnf::physics {

// Homogeneous, inviscid air.
struct Medium {
    double density = 1.2;        // rho0, kg/m^3
    double sound_speed = 343.0;  // c0, m/s

    void validate() const {
        if (!(std::isfinite(density) && density > 0.0 && std::isfinite(sound_speed) && sound_speed > 0.0))
            throw ConfigurationError("Medium: density and sound speed must be positive and finite");
    }
    double impedance() const { return density * sound_speed; }
    bool operator==(const Medium&) const = default;
};

// Particle velocity from the SN3D first-order channels: u = -v / (rho0 c0).
inline Eigen::Vector3d velocity_from_foa(const Eigen::Vector3d& v, const Medium& m) {
    return -v / m.impedance();
}

inline Eigen::Vector3d foa_from_velocity(const Eigen::Vector3d& u, const Medium& m) {
    return -m.impedance() * u;
}

// Linearized momentum equation in FOA variables: grad w - (1/c0) dv/dt.
inline Eigen::Vector3d momentum_residual(const Eigen::Vector3d& grad_w, const Eigen::Vector3d& dv_dt,
                                         const Medium& m) {
    return grad_w - dv_dt / m.sound_speed;
}

// Continuity equation with w = p and u = -v/(rho0 c0) substituted, scaled by -c0 so it
// has the same units as the momentum residual: div v - (1/c0) dw/dt.
inline double continuity_residual(double div_v, double dw_dt, const Medium& m) {
    return div_v - dw_dt / m.sound_speed;
}

// Wave equation for the (scaled) velocity potential: lap psi - (1/c0^2) d2psi/dt2.
inline double wave_residual(double laplacian, double d2_dt2, const Medium& m) {
    return laplacian - d2_dt2 / (m.sound_speed * m.sound_speed);
}

}  // namespace vpnf::physics
