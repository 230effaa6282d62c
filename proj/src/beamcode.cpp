#include "beamrl/beamcode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beamrl/errors.hpp"
#include "beamrl/units.hpp"

namespace beamrl {

ComplexVector steering_vector(double theta, int m_antennas, double spacing_in_wavelengths) {
    require(m_antennas >= 1, "steering_vector: m_antennas must be >= 1");
    const double kd = 2.0 * kPi * spacing_in_wavelengths;
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_antennas));
    ComplexVector a(m_antennas);
    for (int m = 0; m < m_antennas; ++m)
        a[m] = std::polar(scale, kd * m * std::cos(theta));
    return a;
}

Codebook::Codebook(int m_antennas, double spacing_in_wavelengths)
    : m_(m_antennas), spacing_(spacing_in_wavelengths) {
    if (m_antennas < 1)
        detail::throw_config("codebook needs at least one antenna, got " + std::to_string(m_antennas));
    if (!(spacing_in_wavelengths > 0.0))
        detail::throw_config("antenna spacing must be positive");
    angles_.reserve(m_);
    vectors_.reserve(m_);
    for (int n = 0; n < m_; ++n) {
        const double theta = kPi * n / m_;
        angles_.push_back(theta);
        vectors_.push_back(steering_vector(theta, m_, spacing_));
    }
}

double Codebook::phase_step() const { return 2.0 * kPi * spacing_; }

double Codebook::angle(int n) const {
    require(n >= 0 && n < size(), "codebook angle index out of range");
    return angles_[static_cast<std::size_t>(n)];
}

const ComplexVector& Codebook::operator[](int n) const {
    require(n >= 0 && n < size(), "codebook beam index out of range");
    return vectors_[static_cast<std::size_t>(n)];
}

Codebook build_codebook(int m_antennas, double spacing_in_wavelengths) {
    return Codebook(m_antennas, spacing_in_wavelengths);
}

int step_beam(int index, int direction, int codebook_size) {
    require(codebook_size >= 1, "step_beam: empty codebook");
    require(index >= 0 && index < codebook_size, "step_beam: index out of range");
    require(direction == 1 || direction == -1, "step_beam: direction must be +1 or -1");
    return ((index + direction) % codebook_size + codebook_size) % codebook_size;
}

int beam_from_continuous(double raw, int codebook_size) {
    require(codebook_size >= 1, "beam_from_continuous: empty codebook");
    require(!std::isnan(raw), "beam_from_continuous: NaN beam control");
    const double upper = std::nextafter(static_cast<double>(codebook_size), 0.0);
    const double clamped = std::clamp(raw, 0.0, upper);
    return std::min(static_cast<int>(std::floor(clamped)), codebook_size - 1);
}

}  // namespace beamrl
