#include "avgq/generators.hpp"

#include "avgq/errors.hpp"

#include <random>
#include <sstream>
#include <vector>

namespace avgq {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, sep)) {
        out.push_back(item);
    }
    return out;
}

} // namespace

GeneratorSpec parse_generator(const std::string& text) {
    GeneratorSpec spec;
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const auto args = colon == std::string::npos ? std::vector<std::string>{} : split(text.substr(colon + 1), ',');
    try {
        if (name == "cycle2" && args.empty()) {
            spec.kind = GeneratorSpec::Kind::Cycle2;
            spec.S = 2;
            spec.A = 1;
        } else if (name == "ring" && args.size() == 2) {
            spec.kind = GeneratorSpec::Kind::Ring;
            spec.S = std::stoi(args[0]);
            spec.A = 2;
            spec.slip = std::stod(args[1]);
        } else if (name == "dirichlet" && (args.size() == 3 || args.size() == 4)) {
            spec.kind = GeneratorSpec::Kind::RandomDirichlet;
            spec.S = std::stoi(args[0]);
            spec.A = std::stoi(args[1]);
            spec.concentration = std::stod(args[2]);
            if (args.size() == 4) {
                spec.seed = std::stoull(args[3]);
            }
        } else {
            throw ValidationError("unrecognized generator '" + text + "'");
        }
    } catch (const std::logic_error&) {
        throw ValidationError("unrecognized generator '" + text + "'");
    }
    if (spec.S < 1 || spec.A < 1 || !(spec.concentration > 0.0) || !(spec.slip >= 0.0 && spec.slip < 1.0)) {
        throw ValidationError("generator parameters out of range in '" + text + "'");
    }
    return spec;
}

std::string to_string(const GeneratorSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    switch (spec.kind) {
    case GeneratorSpec::Kind::Cycle2:
        os << "cycle2";
        break;
    case GeneratorSpec::Kind::Ring:
        os << "ring:" << spec.S << ',' << spec.slip;
        break;
    case GeneratorSpec::Kind::RandomDirichlet:
        os << "dirichlet:" << spec.S << ',' << spec.A << ',' << spec.concentration << ',' << spec.seed;
        break;
    }
    return os.str();
}

Amdp generate_mdp(const GeneratorSpec& spec) {
    switch (spec.kind) {
    case GeneratorSpec::Kind::Cycle2: {
        Amdp mdp(2, 1);
        mdp.prob(0, 0, 1) = 1.0;
        mdp.prob(1, 0, 0) = 1.0;
        mdp.reward(0, 0) = 1.0;
        mdp.reward(1, 0) = 0.0;
        return mdp;
    }
    case GeneratorSpec::Kind::Ring: {
        Amdp mdp(spec.S, 2);
        for (int s = 0; s < spec.S; ++s) {
            const int ahead = (s + 1) % spec.S;
            mdp.prob(s, 0, ahead) += 1.0 - spec.slip;
            mdp.prob(s, 0, s) += spec.slip;
            mdp.prob(s, 1, s) = 1.0;
        }
        mdp.reward(0, 0) = 1.0;
        validate(mdp);
        return mdp;
    }
    case GeneratorSpec::Kind::RandomDirichlet: {
        std::mt19937_64 rng(spec.seed);
        std::gamma_distribution<double> gamma(spec.concentration, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Amdp mdp(spec.S, spec.A);
        for (int s = 0; s < spec.S; ++s) {
            for (int a = 0; a < spec.A; ++a) {
                double total = 0.0;
                for (int next = 0; next < spec.S; ++next) {
                    mdp.prob(s, a, next) = gamma(rng);
                    total += mdp.prob(s, a, next);
                }
                if (total <= 0.0) {
                    mdp.prob(s, a, s) = total = 1.0;
                }
                for (int next = 0; next < spec.S; ++next) {
                    mdp.prob(s, a, next) /= total;
                }
                mdp.reward(s, a) = unit(rng);
            }
        }
        validate(mdp);
        return mdp;
    }
    }
    throw ValidationError("unknown generator kind");
}

} // namespace avgq
