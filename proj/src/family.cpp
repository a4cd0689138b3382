#include "ivt/family.hpp"

#include <cmath>

namespace ivt {

void validate(const IvtModel& model) {
    validate(model.seed);
    validate(model.trawl);
    if (!(model.delta > 0.0) || !std::isfinite(model.delta)) throw DomainError("grid step delta must be positive");
}

Eigen::VectorXd parameters(const IvtModel& model) {
    const Eigen::VectorXd a = parameters(model.seed);
    const Eigen::VectorXd b = parameters(model.trawl);
    Eigen::VectorXd out(a.size() + b.size());
    out << a, b;
    return out;
}

int parameter_count(const IvtModel& model) { return parameter_count(model.seed) + parameter_count(model.trawl); }

void check_support(const LevySeed& seed, const CountSeries& x) {
    if (!is_nonnegative(seed)) return;
    for (long v : x.values) {
        if (v < 0) throw DomainError("series contains negative counts, outside the support of a nonnegative seed");
    }
}

std::string Family::tag() const {
    std::string s;
    switch (seed) {
        case SeedKind::Poisson: s = "poisson"; break;
        case SeedKind::NegBin: s = "nb"; break;
        case SeedKind::Skellam: s = "skellam"; break;
    }
    switch (trawl) {
        case TrawlKind::Exp: return s + "-exp";
        case TrawlKind::SupExp: return s + "-supexp";
        case TrawlKind::Ig: return s + "-ig";
        case TrawlKind::Gamma: return s + "-gamma";
    }
    return s;
}

Family parse_family(std::string_view tag) {
    const auto dash = tag.find('-');
    if (dash == std::string_view::npos) throw DomainError("family tag must look like <seed>-<trawl>: " + std::string(tag));
    const auto seed = tag.substr(0, dash);
    const auto trawl = tag.substr(dash + 1);
    Family f;
    if (seed == "poisson") f.seed = SeedKind::Poisson;
    else if (seed == "nb") f.seed = SeedKind::NegBin;
    else if (seed == "skellam") f.seed = SeedKind::Skellam;
    else throw DomainError("unknown seed in family tag: " + std::string(tag));
    if (trawl == "exp") f.trawl = TrawlKind::Exp;
    else if (trawl == "supexp") f.trawl = TrawlKind::SupExp;
    else if (trawl == "ig") f.trawl = TrawlKind::Ig;
    else if (trawl == "gamma") f.trawl = TrawlKind::Gamma;
    else throw DomainError("unknown trawl in family tag: " + std::string(tag));
    return f;
}

std::vector<std::string> parameter_names(Family family) {
    std::vector<std::string> names;
    switch (family.seed) {
        case SeedKind::Poisson: names = {"nu"}; break;
        case SeedKind::NegBin: names = {"m", "p"}; break;
        case SeedKind::Skellam: names = {"psi_plus", "psi_minus"}; break;
    }
    switch (family.trawl) {
        case TrawlKind::Exp: names.push_back("lambda"); break;
        case TrawlKind::SupExp: names.insert(names.end(), {"w", "lambda1", "lambda2"}); break;
        case TrawlKind::Ig: names.insert(names.end(), {"delta", "gamma"}); break;
        case TrawlKind::Gamma: names.insert(names.end(), {"H", "alpha"}); break;
    }
    return names;
}

int seed_parameter_count(Family family) { return family.seed == SeedKind::Poisson ? 1 : 2; }

int trawl_parameter_count(Family family) {
    switch (family.trawl) {
        case TrawlKind::Exp: return 1;
        case TrawlKind::SupExp: return 3;
        default: return 2;
    }
}

int parameter_count(Family family) { return seed_parameter_count(family) + trawl_parameter_count(family); }

int default_K(Family family) { return family.trawl == TrawlKind::Exp ? 1 : 10; }

bool is_unit_interval(Family family, int i) {
    if (family.seed == SeedKind::NegBin && i == 1) return true;
    return family.trawl == TrawlKind::SupExp && i == seed_parameter_count(family);
}

void validate(Family family, const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count(family)) {
        throw DomainError("family " + family.tag() + " expects " + std::to_string(parameter_count(family)) +
                          " parameters");
    }
    for (int i = 0; i < theta.size(); ++i) {
        const double v = theta(i);
        const bool ok = is_unit_interval(family, i) ? (v > 0.0 && v < 1.0) : (v > 0.0 && std::isfinite(v));
        if (!ok) throw DomainError("parameter " + parameter_names(family)[i] + " out of range");
    }
}

IvtModel make_model(Family family, const Eigen::VectorXd& theta, double delta) {
    validate(family, theta);
    IvtModel model;
    model.delta = delta;
    switch (family.seed) {
        case SeedKind::Poisson: model.seed = PoissonSeed{theta(0)}; break;
        case SeedKind::NegBin: model.seed = NegBinSeed{theta(0), theta(1)}; break;
        case SeedKind::Skellam: model.seed = SkellamSeed{theta(0), theta(1)}; break;
    }
    const int s = seed_parameter_count(family);
    switch (family.trawl) {
        case TrawlKind::Exp: model.trawl = ExpTrawl{theta(s)}; break;
        case TrawlKind::SupExp:
            model.trawl = SupExpTrawl{{theta(s), 1.0 - theta(s)}, {theta(s + 1), theta(s + 2)}};
            break;
        case TrawlKind::Ig: model.trawl = IgTrawl{theta(s), theta(s + 1)}; break;
        case TrawlKind::Gamma: model.trawl = GammaTrawl{theta(s), theta(s + 1)}; break;
    }
    validate(model);
    return model;
}

Eigen::MatrixXd model_jacobian(Family family, const Eigen::VectorXd& theta) {
    const int p = parameter_count(family);
    if (family.trawl != TrawlKind::SupExp) return Eigen::MatrixXd::Identity(p, p);
    // model trawl parameters are (w1, w2, lambda1, lambda2) with w2 = 1 - w
    const int s = seed_parameter_count(family);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(s + 4, p);
    j.topLeftCorner(s, s).setIdentity();
    j(s, s) = 1.0;
    j(s + 1, s) = -1.0;
    j(s + 2, s + 1) = 1.0;
    j(s + 3, s + 2) = 1.0;
    (void)theta;
    return j;
}

Eigen::VectorXd to_unconstrained(Family family, const Eigen::VectorXd& theta) {
    validate(family, theta);
    Eigen::VectorXd eta(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
        eta(i) = is_unit_interval(family, i) ? std::log(theta(i) / (1.0 - theta(i))) : std::log(theta(i));
    }
    return eta;
}

Eigen::VectorXd from_unconstrained(Family family, const Eigen::VectorXd& eta) {
    Eigen::VectorXd theta(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
        theta(i) = is_unit_interval(family, i) ? 1.0 / (1.0 + std::exp(-eta(i))) : std::exp(eta(i));
    }
    return theta;
}

Eigen::VectorXd transform_jacobian(Family family, const Eigen::VectorXd& eta) {
    const Eigen::VectorXd theta = from_unconstrained(family, eta);
    Eigen::VectorXd j(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
        j(i) = is_unit_interval(family, i) ? theta(i) * (1.0 - theta(i)) : theta(i);
    }
    return j;
}

}  // namespace ivt
