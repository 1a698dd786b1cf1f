#include "cgqed/pauli.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>

#include "cgqed/errors.hpp"

namespace cgqed {

namespace {

using cplx = std::complex<double>;

constexpr int kNumOps = 7;
constexpr int kIdentity = 7;  // product-result code: identity letter (dropped)
constexpr int kZero = 8;      // product-result code: annihilation

struct LetterProduct {
    cplx phase;
    int result;  // 0..6 = POp value, kIdentity, or kZero
};

Eigen::Matrix2cd letter_matrix(int code) {
    const cplx i(0.0, 1.0);
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (code) {
        case int(POp::X): m << 0, 1, 1, 0; break;
        case int(POp::Y): m << 0, -i, i, 0; break;
        case int(POp::Z): m << 1, 0, 0, -1; break;
        case int(POp::Raise): m << 0, 0, 1, 0; break;
        case int(POp::Lower): m << 0, 1, 0, 0; break;
        case int(POp::Occ): m << 0, 0, 0, 1; break;
        case int(POp::Empty): m << 1, 0, 0, 0; break;
        case kIdentity: m.setIdentity(); break;
        default: throw internal_error("bad letter code");
    }
    return m;
}

// Multiplication table built once by matching 2x2 matrix products against
// phase * letter; the alphabet is closed, so every product matches.
const std::array<std::array<LetterProduct, kNumOps>, kNumOps>& product_table() {
    static const auto table = [] {
        std::array<std::array<LetterProduct, kNumOps>, kNumOps> t{};
        const std::array<cplx, 4> phases = {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)};
        for (int a = 0; a < kNumOps; ++a) {
            for (int b = 0; b < kNumOps; ++b) {
                const Eigen::Matrix2cd prod = letter_matrix(a) * letter_matrix(b);
                if (prod.norm() < 1e-12) {
                    t[a][b] = {cplx(0, 0), kZero};
                    continue;
                }
                bool found = false;
                for (int r = 0; r <= kIdentity && !found; ++r) {
                    for (const cplx& ph : phases) {
                        if ((prod - ph * letter_matrix(r)).norm() < 1e-12) {
                            t[a][b] = {ph, r};
                            found = true;
                            break;
                        }
                    }
                }
                if (!found) throw internal_error("letter alphabet not closed");
            }
        }
        return t;
    }();
    return table;
}

POp adjoint_letter(POp op) {
    if (op == POp::Raise) return POp::Lower;
    if (op == POp::Lower) return POp::Raise;
    return op;
}

bool factors_less(const std::vector<PauliFactor>& a, const std::vector<PauliFactor>& b) {
    const size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        if (a[i].qubit != b[i].qubit) return a[i].qubit < b[i].qubit;
        if (a[i].op != b[i].op) return int(a[i].op) < int(b[i].op);
    }
    return a.size() < b.size();
}

bool factors_equal(const std::vector<PauliFactor>& a, const std::vector<PauliFactor>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].qubit != b[i].qubit || a[i].op != b[i].op) return false;
    return true;
}

}  // namespace

const char* pop_name(POp op) {
    switch (op) {
        case POp::X: return "X";
        case POp::Y: return "Y";
        case POp::Z: return "Z";
        case POp::Raise: return "+";
        case POp::Lower: return "-";
        case POp::Occ: return "n1";
        case POp::Empty: return "n0";
    }
    return "?";
}

PauliString multiply(const PauliString& a, const PauliString& b) {
    PauliString out;
    out.coeff = a.coeff * b.coeff;
    if (out.is_zero()) return PauliString{cplx(0, 0), {}};
    out.factors.reserve(a.factors.size() + b.factors.size());
    size_t ia = 0, ib = 0;
    while (ia < a.factors.size() || ib < b.factors.size()) {
        const bool take_a = ib >= b.factors.size() ||
                            (ia < a.factors.size() && a.factors[ia].qubit < b.factors[ib].qubit);
        const bool take_b = ia >= a.factors.size() ||
                            (ib < b.factors.size() && b.factors[ib].qubit < a.factors[ia].qubit);
        if (take_a) {
            out.factors.push_back(a.factors[ia++]);
        } else if (take_b) {
            out.factors.push_back(b.factors[ib++]);
        } else {
            const LetterProduct lp =
                product_table()[int(a.factors[ia].op)][int(b.factors[ib].op)];
            if (lp.result == kZero) return PauliString{cplx(0, 0), {}};
            out.coeff *= lp.phase;
            if (lp.result != kIdentity)
                out.factors.push_back({a.factors[ia].qubit, POp(lp.result)});
            ++ia;
            ++ib;
        }
    }
    return out;
}

PauliString adjoint(const PauliString& s) {
    PauliString out;
    out.coeff = std::conj(s.coeff);
    out.factors = s.factors;
    for (auto& f : out.factors) f.op = adjoint_letter(f.op);
    return out;
}

PauliSum multiply(const PauliSum& a, const PauliSum& b) {
    PauliSum out;
    out.reserve(a.size() * b.size());
    for (const auto& sa : a)
        for (const auto& sb : b) {
            PauliString p = multiply(sa, sb);
            if (!p.is_zero()) out.push_back(std::move(p));
        }
    return out;
}

PauliSum adjoint(const PauliSum& s) {
    PauliSum out;
    out.reserve(s.size());
    for (const auto& t : s) out.push_back(adjoint(t));
    return out;
}

PauliSum simplify(PauliSum sum, double tol) {
    std::sort(sum.begin(), sum.end(), [](const PauliString& a, const PauliString& b) {
        return factors_less(a.factors, b.factors);
    });
    PauliSum out;
    for (auto& s : sum) {
        if (!out.empty() && factors_equal(out.back().factors, s.factors))
            out.back().coeff += s.coeff;
        else
            out.push_back(std::move(s));
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [&](const PauliString& s) { return std::abs(s.coeff) <= tol; }),
              out.end());
    return out;
}

PauliSum add(PauliSum a, const PauliSum& b) {
    a.insert(a.end(), b.begin(), b.end());
    return simplify(std::move(a));
}

PauliSum scale(PauliSum s, std::complex<double> c) {
    for (auto& t : s) t.coeff *= c;
    return s;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
    PauliSum out = multiply(a, b);
    PauliSum ba = multiply(b, a);
    for (auto& t : ba) t.coeff = -t.coeff;
    out.insert(out.end(), ba.begin(), ba.end());
    return simplify(std::move(out));
}

double max_abs_coeff(const PauliSum& s) {
    double m = 0.0;
    for (const auto& t : s) m = std::max(m, std::abs(t.coeff));
    return m;
}

PauliString jw_annihilate(int mode) {
    PauliString s;
    for (int q = 0; q < mode; ++q) s.factors.push_back({q, POp::Z});
    s.factors.push_back({mode, POp::Lower});
    return s;
}

PauliString jw_create(int mode) {
    PauliString s;
    for (int q = 0; q < mode; ++q) s.factors.push_back({q, POp::Z});
    s.factors.push_back({mode, POp::Raise});
    return s;
}

PauliString jw_bilinear(int mode_a, int mode_b) {
    return multiply(jw_create(mode_a), jw_annihilate(mode_b));
}

CompiledString compile_string(const PauliString& s) {
    CompiledString cs;
    cs.base = s.coeff;
    const cplx i(0.0, 1.0);
    for (const auto& f : s.factors) {
        if (f.qubit < 0 || f.qubit >= 63) throw internal_error("compiled string qubit out of range");
        const std::uint64_t bit = std::uint64_t(1) << f.qubit;
        switch (f.op) {
            case POp::X: cs.flip_mask |= bit; break;
            case POp::Y:
                cs.base *= i;
                cs.z_mask |= bit;
                cs.flip_mask |= bit;
                break;
            case POp::Z: cs.z_mask |= bit; break;
            case POp::Raise:
                cs.require_mask |= bit;
                cs.flip_mask |= bit;
                break;
            case POp::Lower:
                cs.require_mask |= bit;
                cs.require_value |= bit;
                cs.flip_mask |= bit;
                break;
            case POp::Occ:
                cs.require_mask |= bit;
                cs.require_value |= bit;
                break;
            case POp::Empty: cs.require_mask |= bit; break;
        }
    }
    return cs;
}

void apply_string(const CompiledString& cs, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    const std::int64_t dim = in.size();
    for (std::int64_t b = 0; b < dim; ++b) {
        const auto ub = std::uint64_t(b);
        if ((ub & cs.require_mask) != cs.require_value) continue;
        const double sign = (std::popcount(ub & cs.z_mask) & 1) ? -1.0 : 1.0;
        out[std::int64_t(ub ^ cs.flip_mask)] += cs.base * sign * in[b];
    }
}

void apply_sum(const PauliSum& sum, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    for (const auto& s : sum) apply_string(compile_string(s), in, out);
}

Eigen::MatrixXcd dense(const PauliString& s, int n_qubits) {
    const std::int64_t dim = std::int64_t(1) << n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    const CompiledString cs = compile_string(s);
    for (std::int64_t b = 0; b < dim; ++b) {
        const auto ub = std::uint64_t(b);
        if ((ub & cs.require_mask) != cs.require_value) continue;
        const double sign = (std::popcount(ub & cs.z_mask) & 1) ? -1.0 : 1.0;
        m(std::int64_t(ub ^ cs.flip_mask), b) += cs.base * sign;
    }
    return m;
}

Eigen::MatrixXcd dense(const PauliSum& sum, int n_qubits) {
    const std::int64_t dim = std::int64_t(1) << n_qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& s : sum) m += dense(s, n_qubits);
    return m;
}

int highest_qubit(const PauliSum& sum) {
    int hi = -1;
    for (const auto& s : sum)
        for (const auto& f : s.factors) hi = std::max(hi, f.qubit);
    return hi;
}

std::string to_string(const PauliString& s) {
    std::ostringstream os;
    os << "(" << s.coeff.real() << (s.coeff.imag() < 0 ? "" : "+") << s.coeff.imag() << "i)";
    for (const auto& f : s.factors) os << " " << pop_name(f.op) << f.qubit;
    return os.str();
}

}  // namespace cgqed
