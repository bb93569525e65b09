#pragma once

namespace crcs {

// Observation time distribution on a bounded interval [a, b].
struct ObsDist {
    enum class Kind { uniform, trunc_exponential };

    Kind kind = Kind::uniform;
    double a = 0.0;
    double b = 1.0;
    double rate = 1.0;  // trunc_exponential only

    double cdf(double t) const;
    double pdf(double t) const;
    double quantile(double u) const;  // u in (0,1)
};

// Failure time distribution of one cause, supported on [0, inf).
struct CauseShape {
    enum class Kind { exponential, weibull };

    Kind kind = Kind::exponential;
    double rate = 1.0;   // exponential
    double shape = 1.0;  // weibull
    double scale = 1.0;  // weibull

    double cdf(double t) const;
    double pdf(double t) const;
    double quantile(double u) const;  // u in (0,1)
};

void validate_obs_dist(const ObsDist& g);
void validate_cause_shape(const CauseShape& s);

}  // namespace crcs
