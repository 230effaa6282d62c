#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace beamrl {

using ComplexVector = Eigen::VectorXcd;

/// Normalized ULA steering vector: entries exp(j*k*d*m*cos(theta)) / sqrt(M).
ComplexVector steering_vector(double theta, int m_antennas, double spacing_in_wavelengths = 0.5);

/// Fixed beamsteering codebook for a uniform linear array.
///
/// Beam n steers towards theta_n = pi*n/M, n = 0..M-1, so the codebook has
/// one beam per antenna. Every entry has modulus 1/sqrt(M) (constant-modulus
/// phase shifters) and every beam has unit norm. Immutable after construction.
class Codebook {
public:
    Codebook(int m_antennas, double spacing_in_wavelengths);

    int m_antennas() const { return m_; }
    int size() const { return static_cast<int>(vectors_.size()); }
    double spacing_in_wavelengths() const { return spacing_; }
    /// k*d in radians.
    double phase_step() const;
    double angle(int n) const;
    const ComplexVector& operator[](int n) const;
    const std::vector<ComplexVector>& vectors() const { return vectors_; }

private:
    int m_;
    double spacing_;
    std::vector<double> angles_;
    std::vector<ComplexVector> vectors_;
};

Codebook build_codebook(int m_antennas, double spacing_in_wavelengths = 0.5);

/// Circular beam stepping: (index + direction) mod size.
int step_beam(int index, int direction, int codebook_size);

/// Clamps a continuous beam control to [0, size) and floors it.
int beam_from_continuous(double raw, int codebook_size);

}  // namespace beamrl
