#pragma once

#include <cstddef>
#include <vector>

namespace tailrisk::stats {

double mean(const std::vector<double>& x);
// ddof = denominator offset: 1 gives the sample variance, 0 the population one.
double variance(const std::vector<double>& x, int ddof = 1);
double stddev(const std::vector<double>& x, int ddof = 1);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

// Standard (unscaled) Student-t with nu degrees of freedom.
double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);

// Log-density of the unit-variance ("standardized") Student-t, nu > 2.
double std_t_logpdf(double z, double nu);

// Upper-tail probability of a chi-square with df degrees of freedom.
double chisq_sf(double x, double df);

// Ranks 1..n with ties replaced by the average of the tied positions.
std::vector<double> average_ranks(const std::vector<double>& x);

}  // namespace tailrisk::stats
