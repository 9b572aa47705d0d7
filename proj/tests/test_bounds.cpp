#include <cmath>
#include <numbers>

#include "convex_auction/bounds.hpp"
#include "convex_auction/error.hpp"
#include "convex_auction/mechanisms.hpp"
#include "convex_auction/optimal.hpp"
#include "doctest.h"

using namespace convex_auction;
using doctest::Approx;
using std::numbers::e;

namespace {

double value(GuaranteeKind kind, long n, double d) {
  GuaranteeRequest r;
  r.kind = kind;
  r.bidders = n;
  r.exponent = d;
  return guarantee(r).value;
}

ErrorCode code_of(const GuaranteeRequest& r) {
  try {
    guarantee(r);
  } catch (const Error& err) {
    return err.code();
  }
  FAIL("expected an Error");
  return ErrorCode::BadConfig;
}

}  // namespace

TEST_CASE("closed forms") {
  const double pf = value(GuaranteeKind::prior_free, 30, 2.0);
  CHECK(pf == Approx(0.125 * std::sqrt(29.0 / 30.0) / std::sqrt(e)));
  CHECK(std::round(pf * 100.0) / 100.0 == Approx(0.07));

  const double med = value(GuaranteeKind::median_reserve, 30, 2.0);
  CHECK(med == Approx(0.5 * std::sqrt(60.0 / (31.0 * e))));
  CHECK(std::round(med * 100.0) / 100.0 == Approx(0.42));

  GuaranteeRequest limit;
  limit.kind = GuaranteeKind::median_reserve;
  limit.bidders_limit = true;
  limit.exponent = 2.0;
  CHECK(guarantee(limit).value == Approx(0.5 * std::sqrt(2.0 / e)));
  CHECK(guarantee(limit).value >= 0.42);

  CHECK(value(GuaranteeKind::cost_optimized, 10, 2.5) ==
        Approx(std::pow(10.0 / 11.0, 0.4) / (2.0 * std::sqrt(e))));
  CHECK(value(GuaranteeKind::cost_optimized, 10, 4.0) ==
        Approx(std::pow(10.0 / 11.0, 0.25) / std::pow(8.0 * e, 0.25)));

  GuaranteeRequest mono;
  mono.kind = GuaranteeKind::monopoly_reserve;
  mono.bidders = 5;
  mono.exponent = 2.0;
  mono.cdf_at_monopoly = 0.4;
  CHECK(guarantee(mono).value == Approx(std::sqrt(5 * 0.6 / (1 + 4 * 0.6) / e)));

  GuaranteeRequest ub;
  ub.kind = GuaranteeKind::opt_ub_mean;
  ub.bidders = 4;
  ub.exponent = 2.0;
  ub.mean = 9.0;
  CHECK(guarantee(ub).value == Approx(4 * 1.5));
  ub.kind = GuaranteeKind::opt_ub_mhr;
  ub.median = 4.0;
  CHECK(guarantee(ub).value == Approx(4 * std::sqrt(e)));

  GuaranteeRequest single;
  single.kind = GuaranteeKind::single_bidder_median;
  single.exponent = 1.0;
  CHECK(guarantee(single).value == 0.5);
}

TEST_CASE("all-pay precondition flag") {
  GuaranteeRequest r;
  r.kind = GuaranteeKind::all_pay;
  r.exponent = 2.0;
  r.median = 10.0;
  r.max_value = 20.0;
  r.bidders = 8;
  auto g = guarantee(r);
  CHECK(g.value == 0.0625);
  CHECK_FALSE(g.precondition_met);
  r.bidders = static_cast<long>(std::ceil(32.0 * std::log(32.0)));
  g = guarantee(r);
  CHECK(g.precondition_met);
}

TEST_CASE("missing parameters and exponent floors") {
  GuaranteeRequest r;
  r.kind = GuaranteeKind::median_reserve;
  r.bidders = 3;
  CHECK(code_of(r) == ErrorCode::MissingParameter);
  r.exponent = 1.5;
  CHECK(code_of(r) == ErrorCode::ExponentTooSmall);

  GuaranteeRequest m;
  m.kind = GuaranteeKind::monopoly_reserve;
  m.bidders = 3;
  m.exponent = 2.0;
  CHECK(code_of(m) == ErrorCode::MissingParameter);

  GuaranteeRequest a;
  a.kind = GuaranteeKind::all_pay;
  a.bidders = 4;
  a.exponent = 2.0;
  a.median = 1.0;
  CHECK(code_of(a) == ErrorCode::MissingParameter);

  GuaranteeRequest u;
  u.kind = GuaranteeKind::opt_ub_mean;
  u.bidders = 4;
  u.exponent = 2.0;
  CHECK(code_of(u) == ErrorCode::MissingParameter);

  GuaranteeRequest pf;
  pf.kind = GuaranteeKind::prior_free;
  pf.bidders = 1;
  pf.exponent = 2.0;
  CHECK(code_of(pf) == ErrorCode::BadBidderCount);
}

TEST_CASE("orderings and limits") {
  for (long n = 2; n <= 200; ++n)
    for (double d : {2.0, 2.5, 3.0, 5.0, 10.0}) {
      const double pf = value(GuaranteeKind::prior_free, n, d);
      CHECK(pf >= 1.0 / (16.0 * e) - 1e-15);
      CHECK(value(GuaranteeKind::median_reserve, n, d) >= pf);
    }
  double previous = 0.0;
  for (double d : {3.0, 10.0, 100.0}) {
    GuaranteeRequest r;
    r.kind = GuaranteeKind::cost_optimized;
    r.bidders_limit = true;
    r.exponent = d;
    const double g = guarantee(r).value;
    CHECK(g > previous);
    previous = g;
  }
  GuaranteeRequest far;
  far.kind = GuaranteeKind::cost_optimized;
  far.bidders_limit = true;
  far.exponent = 1e6;
  CHECK(guarantee(far).value == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("guarantees hold against the optimum") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(child_seed(17, {seed}));
    const auto dist = gen_random_mhr(15, rng);
    const auto s = stats(dist);
    for (double d : {2.0, 3.0}) {
      const PaymentExponent exp(d);
      for (int n = 2; n <= 10; ++n) {
        const double opt = solve_optimal(build_program(dist, n, exp)).total_revenue;
        const double median =
            reserve_expected_revenue(dist, n, resolve_reserve(dist, ReservePolicy::median(), exp), exp);
        const double mono = reserve_expected_revenue(dist, n, s.monopoly_reserve, exp);
        const double cost = reserve_expected_revenue(
            dist, n, resolve_reserve(dist, ReservePolicy::cost_optimized(), exp), exp);
        const double pf = price_setter_expected_revenue(dist, n, exp);
        CHECK(median / opt >= value(GuaranteeKind::median_reserve, n, d));
        CHECK(cost / opt >= value(GuaranteeKind::cost_optimized, n, d));
        CHECK(pf / opt >= value(GuaranteeKind::prior_free, n, d));

        GuaranteeRequest r;
        r.kind = GuaranteeKind::monopoly_reserve;
        r.bidders = n;
        r.exponent = d;
        r.cdf_at_monopoly = 1.0 - s.monopoly_quantile;
        CHECK(mono / opt >= guarantee(r).value);
      }
    }
  }
}
