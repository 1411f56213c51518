#include <qflow/config.hpp>

#include <gtest/gtest.h>

#include <string>

using namespace qflow;

namespace {

const char* kBase = R"(# comment
[shape]
type = ellipse
a = 2
b = 1
N = 64

[law]
n = 1
k = 1
alpha = 1   ; trailing comment

[flow]
t_end = 2
volume_correct = true
snapshot_stride = 10

[output]
directory = out
formats = csv, json
)";

std::string error_of(const std::string& text)
{
    try {
        to_run_config(parse_config_string(text));
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to)
{
    const auto p = s.find(from);
    EXPECT_NE(p, std::string::npos) << from;
    return s.replace(p, from.size(), to);
}

} // namespace

TEST(Config, ParsesAllSections)
{
    const auto rc = to_run_config(parse_config_string(kBase));
    EXPECT_EQ(rc.backend(), Backend::circle);
    EXPECT_EQ(rc.N, 64);
    EXPECT_EQ(rc.flow.law, SpeedLaw(1, 1, 1.0));
    EXPECT_EQ(rc.flow.t_end, 2.0);
    EXPECT_TRUE(rc.flow.volume_correct);
    EXPECT_EQ(rc.flow.snapshot_stride, 10);
    EXPECT_EQ(rc.directory, "out");
    EXPECT_EQ(rc.formats, (std::set<std::string>{"csv", "json"}));
    const auto& e = std::get<shape::Ellipse>(rc.shape);
    EXPECT_EQ(e.a, 2.0);
}

TEST(Config, SweepExpansionOrder)
{
    auto text = replace(kBase, "alpha = 1", "alpha = [0.5, 1, 2]");
    text = replace(text, "N = 64", "N = [32, 64]");
    const auto cells = expand_sweep(parse_config_string(text));
    ASSERT_EQ(cells.size(), 6u);
    // N appears first in the file, so it varies slowest
    EXPECT_EQ(cells[0].label, "N-32_alpha-0.5");
    EXPECT_EQ(cells[1].label, "N-32_alpha-1");
    EXPECT_EQ(cells[3].label, "N-64_alpha-0.5");
    for (const auto& c : cells)
        EXPECT_NO_THROW(to_run_config(c.config));
    EXPECT_EQ(to_run_config(cells[5].config).flow.law.alpha(), 2.0);
    EXPECT_EQ(cells[5].swept.front().first, "shape.N");

    const auto single = expand_sweep(parse_config_string(kBase));
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].label, "single");
}

TEST(ConfigErrors, LineNumberedMessages)
{
    EXPECT_EQ(error_of(replace(kBase, "alpha = 1", "alpha = 0")), "line 11: alpha > 0 required");
    EXPECT_EQ(error_of(replace(kBase, "alpha = 1", "alpha = []")), "line 11: empty list for 'alpha'");
    EXPECT_EQ(error_of(replace(kBase, "alpha = 1", "alpha = [1,,2]")), "line 11: empty list element for 'alpha'");
    EXPECT_EQ(error_of(replace(kBase, "alpha = 1", "alpha = [1, 2")), "line 11: unterminated list");
    EXPECT_EQ(error_of(replace(kBase, "alpha = 1", "alpha = [1, 2]")).rfind("line 11:", 0), 0u);
    EXPECT_EQ(error_of(replace(kBase, "b = 1", "colour = red")), "line 5: unknown key 'colour' in [shape]");
    EXPECT_EQ(error_of(replace(kBase, "b = 1", "a = 3")), "line 5: duplicate key 'a'");
    EXPECT_EQ(error_of(replace(kBase, "[flow]", "[solver]")), "line 13: unknown section [solver]");
    EXPECT_EQ(error_of(replace(kBase, "N = 64", "N = 63")).rfind("line 6:", 0), 0u);
    EXPECT_EQ(error_of(replace(kBase, "N = 64", "N = 8")), "line 6: N must lie in [16, 2^20]");
    EXPECT_EQ(error_of(replace(kBase, "n = 1", "n = 2")).rfind("line 9:", 0), 0u);
    EXPECT_EQ(error_of(replace(kBase, "t_end = 2", "t_end = -1")), "line 14: t_end > 0 required");
    EXPECT_EQ(error_of(replace(kBase, "t_end = 2", "t_end = soon")).rfind("line 14:", 0), 0u);
    EXPECT_EQ(error_of(replace(kBase, "type = ellipse", "type = cube")), "line 3: unknown shape type 'cube'");
    EXPECT_EQ(error_of(replace(kBase, "formats = csv, json", "formats = csv, pdf")),
              "line 20: unknown output format 'pdf'");
    EXPECT_EQ(error_of(replace(kBase, "a = 2", "radius = 2")).rfind("line 4:", 0), 0u);
}
