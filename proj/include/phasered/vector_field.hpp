#ifndef PHASERED_VECTOR_FIELD_HPP
#define PHASERED_VECTOR_FIELD_HPP

#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "phasered/model.hpp"

namespace phasered {

/// Autonomous vector field with an analytic Jacobian. Phase coordinates (angles)
/// occupy the index range [phase_begin(), dim()).
class VectorField {
public:
    virtual ~VectorField() = default;

    virtual std::size_t dim() const = 0;
    virtual std::size_t phase_begin() const = 0;
    virtual void rhs(std::span<const double> x, std::span<double> dx) const = 0;
    virtual Eigen::MatrixXd jacobian(std::span<const double> x) const = 0;
    virtual std::string name() const = 0;

    std::size_t num_phases() const { return dim() - phase_begin(); }
};

/// The full (R, phi) network system.
class FullSystem final : public VectorField {
public:
    explicit FullSystem(Model model) : model_(std::move(model)) {}

    std::size_t dim() const override { return 2 * model_.size(); }
    std::size_t phase_begin() const override { return model_.size(); }
    void rhs(std::span<const double> x, std::span<double> dx) const override { full_rhs(x, dx, model_); }
    Eigen::MatrixXd jacobian(std::span<const double> x) const override { return full_jacobian(x, model_); }
    std::string name() const override { return "full"; }

    const Model& model() const { return model_; }

private:
    Model model_;
};

} // namespace phasered

#endif
