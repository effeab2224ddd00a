#pragma once

namespace hom::special {

// Scaled complementary error function exp(x²)·erfc(x), stable for large x.
double erfcx(double x);

// (exp(-|t|/decay) ⊗ N(0, sigma²))(tau): a unit-peak two-sided exponential
// convolved with a unit-area Gaussian. sigma = 0 returns the exponential itself.
double exp_gauss_conv(double tau, double decay, double sigma);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace hom::special
