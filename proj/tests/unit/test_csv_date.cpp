#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "../support/synthetic.hpp"
#include "sensi/csv.hpp"
#include "sensi/date.hpp"
#include "sensi/dataset.hpp"
#include "sensi/errors.hpp"

using namespace sensi;

TEST_CASE("parse_date accepts strict ISO dates only") {
    CHECK(format_date(parse_date("2020-03-01")) == "2020-03-01");
    CHECK(format_date(parse_date("2021-12-27")) == "2021-12-27");
    CHECK(parse_date("2020-02-29") == parse_date("2020-02-28") + std::chrono::days(1));

    CHECK_THROWS_AS(parse_date("2020-3-01"), ValidationError);
    CHECK_THROWS_AS(parse_date("2020/03/01"), ValidationError);
    CHECK_THROWS_AS(parse_date("2020-13-01"), ValidationError);
    CHECK_THROWS_AS(parse_date("2021-02-29"), ValidationError);
    CHECK_THROWS_AS(parse_date("20200301"), ValidationError);
    CHECK_THROWS_AS(parse_date(" 2020-03-01"), ValidationError);
    CHECK_THROWS_AS(parse_date("2020-03-01 "), ValidationError);
    CHECK_THROWS_AS(parse_date(""), ValidationError);
}

TEST_CASE("day arithmetic") {
    Date a = parse_date("2020-03-01");
    Date b = parse_date("2021-11-27");
    CHECK(day_count(a, b) == 637);
    CHECK(day_count(a, a) == 1);
    CHECK_THROWS_AS(day_count(b, a), ValidationError);

    auto r = date_range(a, a + std::chrono::days(2));
    REQUIRE(r.size() == 3);
    CHECK(r[0] == a);
    CHECK(r[2] == a + std::chrono::days(2));
}

TEST_CASE("day_of_week_monday0") {
    CHECK(day_of_week_monday0(parse_date("2020-03-02")) == 0);  // a Monday
    CHECK(day_of_week_monday0(parse_date("2020-03-01")) == 6);  // a Sunday
    CHECK(day_of_week_monday0(parse_date("2020-03-05")) == 3);  // a Thursday
}

TEST_CASE("sin_weekly has period 7, Monday zero, bounded range") {
    Date monday = parse_date("2020-03-02");
    CHECK(sin_weekly(monday) == doctest::Approx(0.0).epsilon(1e-12));
    for (int t = 0; t < 28; ++t) {
        Date d = monday + std::chrono::days(t);
        double v = sin_weekly(d);
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
        CHECK(sin_weekly(d + std::chrono::days(7)) == doctest::Approx(v).epsilon(1e-12));
        int dow = day_of_week_monday0(d);
        CHECK(v == doctest::Approx(std::sin(2.0 * M_PI * dow / 7.0)).epsilon(1e-12));
    }
    // Thursday = day 3
    CHECK(sin_weekly(parse_date("2020-03-05")) ==
          doctest::Approx(std::sin(2.0 * M_PI * 3.0 / 7.0)).epsilon(1e-12));
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 123456.789, 1e-8, -2.5e17,
                     0.30000000000000004, 637.0}) {
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-0.5) == "-0.5");
}

TEST_CASE("format_fixed") {
    CHECK(format_fixed(6.442, 1) == "6.4");
    CHECK(format_fixed(11.246, 1) == "11.2");
    CHECK(format_fixed(3.0, 1) == "3.0");
    CHECK(format_fixed(0.1234, 3) == "0.123");
}

TEST_CASE("read_csv basics") {
    auto dir = testsupport::scratch_dir("csv_basics");
    {
        std::ofstream out(dir / "ok.csv");
        out << "a,b\r\n1,2\n3,4\n\n";
    }
    auto csv = read_csv(dir / "ok.csv");
    REQUIRE(csv.header.size() == 2);
    CHECK(csv.header[1] == "b");
    REQUIRE(csv.rows.size() == 2);
    CHECK(csv.rows[1][0] == "3");
    CHECK(csv.line[0] == 2);
    CHECK(csv.line[1] == 3);

    {
        std::ofstream out(dir / "ragged.csv");
        out << "a,b\n1\n";
    }
    CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), ValidationError);
    CHECK_THROWS_AS(read_csv(dir / "nope.csv"), MissingInputError);

    require_header(csv, dir / "ok.csv", {"a", "b"});
    CHECK_THROWS_AS(require_header(csv, dir / "ok.csv", {"a", "c"}), ValidationError);
}

TEST_CASE("field parsers carry file context") {
    CHECK(parse_double_field("1.5", "f.csv", 3) == 1.5);
    CHECK(parse_count_field("12", "f.csv", 3) == 12);
    CHECK_THROWS_AS(parse_double_field("abc", "f.csv", 3), ValidationError);
    CHECK_THROWS_AS(parse_count_field("-1", "f.csv", 3), ValidationError);
    CHECK_THROWS_AS(parse_count_field("1.5", "f.csv", 3), ValidationError);
    try {
        parse_double_field("abc", "f.csv", 3);
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("f.csv") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);
    }
}

TEST_CASE("write_file_atomic replaces content and leaves no temp files") {
    auto dir = testsupport::scratch_dir("atomic_write");
    auto p = dir / "x.txt";
    write_file_atomic(p, "first");
    write_file_atomic(p, "second");
    std::ifstream in(p);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "second");
    int entries = 0;
    for (auto& e : std::filesystem::directory_iterator(dir)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);
}
