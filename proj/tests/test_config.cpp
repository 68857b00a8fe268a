#include "doctest.h"

#include "kacsim/config.hpp"
#include "kacsim/errors.hpp"

using namespace kacsim;

TEST_SUITE_BEGIN("config");

static const char* kSample = R"(
# top-level settings
seed = 18446744073709551615
label = "hello world"
flag = true

[kernel]
type = "redistribution_bernoulli"
epsilon = 0.1
delta = 0.5

[kernel.base]
type = "saving_propensity"
lambda = 0.3

[kernel.base.eta]
type = "uniform01"

[kernel.a0dist]
type = "point_mass"
value = 2.0   # the redistributed amount

[init]
type = "gaussian"
mean = 2.0
stddev = 1.0

[contraction]
times = [0.5, 1.0, 2.0, 4.0]
)";

TEST_CASE("parsing: sections, nesting, types") {
    const ConfigTable cfg = ConfigTable::parse_string(kSample);
    CHECK(cfg.at("seed").as_u64() == 18446744073709551615ULL);
    CHECK(cfg.at("label").as_string() == "hello world");
    CHECK(cfg.at("flag").as_bool());
    CHECK(cfg.table("kernel").at("type").as_string() == "redistribution_bernoulli");
    CHECK(cfg.table("kernel").table("base").at("lambda").as_double() == 0.3);
    CHECK(cfg.table("kernel").table("base").table("eta").at("type").as_string() ==
          "uniform01");
    CHECK(cfg.table("kernel").table("a0dist").at("value").as_double() == 2.0);
    const auto times = cfg.table("contraction").at("times").as_double_array();
    CHECK(times == std::vector<double>{0.5, 1.0, 2.0, 4.0});
}

TEST_CASE("errors carry the offending key path") {
    const ConfigTable cfg = ConfigTable::parse_string(kSample);
    CHECK_THROWS_WITH_AS(cfg.table("kernel").at("missing"),
                         doctest::Contains("kernel.missing"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg.table("nope"), doctest::Contains("nope"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg.table("kernel").at("epsilon").as_bool(),
                         doctest::Contains("kernel.epsilon"), ConfigError);
}

TEST_CASE("malformed input is rejected with a line number") {
    CHECK_THROWS_WITH_AS(ConfigTable::parse_string("a = 1\nnonsense line\n"),
                         doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_AS(ConfigTable::parse_string("[unterminated\n"), ConfigError);
    CHECK_THROWS_WITH_AS(ConfigTable::parse_string("a = 1\na = 2\n"),
                         doctest::Contains("duplicate"), ConfigError);
}

TEST_CASE("kernel construction from config") {
    const ConfigTable cfg = ConfigTable::parse_string(kSample);
    const KernelPtr k = kernel_from_config(cfg.table("kernel"));
    CHECK(k->describe() ==
          "redistribution_bernoulli(eps=0.1,delta=0.5,a0=point_mass(2),"
          "base=saving_propensity(lambda=0.3,eta=uniform01))");
    CHECK(*k->facts().mean_sum == doctest::Approx(0.95));

    const InitialDistribution init = init_from_config(cfg.table("init"));
    CHECK(init.mean() == 2.0);
    CHECK(init.describe() == "gaussian(2,1)");
}

TEST_CASE("every kernel type is constructible from config") {
    const char* text = R"(
[k1]
type = "kac_classical"
[k2]
type = "inelastic_kac"
p = 1.0
[k2.background]
type = "rademacher"
scale = 0.5
[k3]
type = "pure_gambling"
[k3.eta]
type = "uniform01"
[k4]
type = "chi_general"
epsilon = 0.3
chi = 1.0
m0 = 1.0
[k4.base]
type = "redistribution_full"
epsilon = 0.3
[k4.base.base]
type = "pure_gambling"
[k4.base.base.eta]
type = "uniform01"
[k4.base.a0dist]
type = "point_mass"
value = 0.0
[k5]
type = "thermal_bath_diff"
a = 0.5
b = 0.25
[k5.base]
type = "inelastic_kac"
p = 1.0
[k6]
type = "degenerate_pin"
m = 1.5
[k6.base]
type = "inelastic_kac"
p = 1.0
)";
    const ConfigTable cfg = ConfigTable::parse_string(text);
    for (const char* name : {"k1", "k2", "k3", "k4", "k5", "k6"}) {
        const KernelPtr k = kernel_from_config(cfg.table(name));
        CHECK(k != nullptr);
    }
    CHECK(*kernel_from_config(cfg.table("k4"))->facts().mean_sum ==
          doctest::Approx(0.7 / 1.3));
}

TEST_CASE("unknown types fail with the table path") {
    const ConfigTable cfg = ConfigTable::parse_string("[kernel]\ntype = \"warp\"\n");
    CHECK_THROWS_WITH_AS(kernel_from_config(cfg.table("kernel")),
                         doctest::Contains("kernel"), ConfigError);
}

TEST_SUITE_END();
