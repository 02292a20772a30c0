#pragma once

#include "hft/real.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hft {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Division or inversion hit samples that are not invertible.
struct RingError : std::runtime_error {
    RingError(const std::string& what, std::vector<int> idx)
        : std::runtime_error(what), indices(std::move(idx)) {}
    std::vector<int> indices;
};

enum class GaugeKind { identity, log };

GaugeKind parse_gauge(const std::string& s);
std::string gauge_name(GaugeKind g);

struct EpsGrid {
    std::vector<real> eps;
    std::vector<real> rho;
    GaugeKind gauge = GaugeKind::identity;
    int q_check = 6;
    int n_max = 64;

    std::size_t size() const { return eps.size(); }
    // classification looks at the last half of the grid
    std::size_t tail_begin() const { return eps.size() / 2; }
    std::string canonical() const;
};

using Grid = std::shared_ptr<const EpsGrid>;

Grid make_grid(int depth, double base, GaugeKind gauge = GaugeKind::identity,
               int q_check = 6, int n_max = 64);
// Explicit arrays (used by JSON import). Validates the grid invariants.
Grid make_grid(std::vector<real> eps, std::vector<real> rho, int q_check = 6, int n_max = 64);

struct Classification {
    bool moderate = true;
    bool negligible = false;
    double sharp_order = 0;  // may be +inf (all tail samples ~0) or -inf
};

enum class Magnitude { infinitesimal, finite, infinite, mixed };
enum class InfiniteKind { none, strong, weak, neither };

struct MagnitudeClass {
    Magnitude cls = Magnitude::finite;
    InfiniteKind sub = InfiniteKind::none;
};

std::string to_string(Magnitude m);
std::string to_string(InfiniteKind k);

enum class OrderRel { leq, geq_strict_on_tail, undecided };
std::string to_string(OrderRel r);

class GenNumber {
public:
    GenNumber() = default;
    GenNumber(Grid g, std::vector<real> samples);

    static GenNumber constant(const Grid& g, const real& c);
    static GenNumber rho(const Grid& g);
    static GenNumber eps(const Grid& g);
    static GenNumber from_fn(const Grid& g, const std::function<real(std::size_t)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return s_.size(); }
    const real& operator[](std::size_t i) const { return s_[i]; }
    const std::vector<real>& samples() const { return s_; }

    const Classification& classify() const;

private:
    struct Cache {
        std::once_flag once;
        Classification value;
    };
    Grid grid_;
    std::vector<real> s_;
    std::shared_ptr<Cache> cache_;
};

GenNumber operator+(const GenNumber& x, const GenNumber& y);
GenNumber operator-(const GenNumber& x, const GenNumber& y);
GenNumber operator*(const GenNumber& x, const GenNumber& y);
GenNumber operator/(const GenNumber& x, const GenNumber& y);
GenNumber operator-(const GenNumber& x);
GenNumber operator*(const real& c, const GenNumber& x);
GenNumber abs(const GenNumber& x);
GenNumber min(const GenNumber& x, const GenNumber& y);
GenNumber max(const GenNumber& x, const GenNumber& y);
GenNumber pow(const GenNumber& x, int n);
GenNumber pow(const GenNumber& x, const GenNumber& y);
GenNumber log(const GenNumber& x);
GenNumber exp(const GenNumber& x);
GenNumber map(const GenNumber& x, const std::function<real(const real&)>& f);

// Least-squares slope of log|x| against log rho over the tail.
double sharp_order(const GenNumber& x);
// Largest q with |x_eps| <= 2 rho_eps^q on every tail index.
double certified_order(const GenNumber& x);
bool negligible(const GenNumber& x, int q);
bool moderate(const GenNumber& x);
bool eq_up_to_negligible(const GenNumber& x, const GenNumber& y, int q);
OrderRel order_compare(const GenNumber& x, const GenNumber& y);
bool invertible(const GenNumber& x);
// Tail indices that block invertibility (empty when invertible).
std::vector<int> non_invertible_indices(const GenNumber& x);
MagnitudeClass magnitude(const GenNumber& x);

class GenComplex {
public:
    GenComplex() = default;
    GenComplex(GenNumber re);  // NOLINT
    GenComplex(GenNumber re, GenNumber im);
    static GenComplex from_fn(const Grid& g, const std::function<cplx(std::size_t)>& f);

    const GenNumber& re() const { return re_; }
    const GenNumber& im() const { return im_; }
    const Grid& grid() const { return re_.grid(); }
    std::size_t size() const { return re_.size(); }
    cplx operator[](std::size_t i) const { return {re_[i], im_[i]}; }
    bool is_real() const;

private:
    GenNumber re_, im_;
};

GenComplex operator+(const GenComplex& x, const GenComplex& y);
GenComplex operator-(const GenComplex& x, const GenComplex& y);
GenComplex operator*(const GenComplex& x, const GenComplex& y);
GenComplex operator/(const GenComplex& x, const GenComplex& y);
GenComplex operator-(const GenComplex& x);
GenComplex conj(const GenComplex& x);
GenNumber abs(const GenComplex& x);
bool eq_up_to_negligible(const GenComplex& x, const GenComplex& y, int q);

void check_same_grid(const Grid& a, const Grid& b);

}  // namespace hft
