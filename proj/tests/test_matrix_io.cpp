#include "nrcid/errors.hpp"
#include "nrcid/io.hpp"
#include "nrcid/matrix.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace nrcid;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nrcid_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST(Matrix, RejectsZeroDimensions) {
    EXPECT_THROW(Matrix(0, 3), std::invalid_argument);
    EXPECT_THROW(Matrix(3, 0), std::invalid_argument);
    EXPECT_THROW(Matrix(2, 2, std::vector<double>(3)), std::invalid_argument);
}

TEST(Matrix, FromRowsAndAccess) {
    const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_EQ(m.row(1)[0], 4.0);
    EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
}

TEST(Matrix, SelectRowsAndScale) {
    const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const std::vector<std::size_t> idx{2, 0};
    EXPECT_EQ(m.select_rows(idx), Matrix::from_rows({{5, 6}, {1, 2}}));
    EXPECT_EQ(m.scaled(2.0), Matrix::from_rows({{2, 4}, {6, 8}, {10, 12}}));
    const std::vector<std::size_t> bad{3};
    EXPECT_THROW(m.select_rows(bad), std::out_of_range);
}

TEST(Matrix, FiniteCheck) {
    Matrix m(2, 2, 1.0);
    EXPECT_TRUE(m.all_finite());
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_FALSE(m.all_finite());
}

TEST(Matrix, BitwiseEqualSeesSignedZero) {
    Matrix a(1, 1, 0.0);
    Matrix b(1, 1, -0.0);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(bitwise_equal(a, b));
}

TEST(Csv, ParsesHeaderCrlfAndMissingTrailingNewline) {
    const Matrix m = parse_csv("# x,y\r\n1,2\r\n3.5,-4e-3");
    EXPECT_EQ(m, Matrix::from_rows({{1, 2}, {3.5, -4e-3}}));
}

TEST(Csv, RaggedRowNamesLine) {
    try {
        parse_csv("1,2\n3\n", "data.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("data.csv:2"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("ragged"), std::string::npos);
    }
}

TEST(Csv, NonNumericCellNamesLineAndColumn) {
    try {
        parse_csv("# h\n1,2\n3,abc\n", "f.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("f.csv:3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    }
}

TEST(Csv, EmptyInputsAreErrors) {
    EXPECT_THROW(parse_csv(""), DataError);
    EXPECT_THROW(parse_csv("# only a header\n"), DataError);
    EXPECT_THROW(parse_csv("1,2\n\n3,4\n"), DataError);
    EXPECT_THROW(parse_csv("1,,2\n"), DataError);
}

TEST(Csv, RoundTripIsBitwise) {
    Matrix m = oracle::random_matrix(50, 7, 11, -1e6, 1e6);
    m(0, 0) = 0.1;
    m(0, 1) = 1.0 / 3.0;
    m(0, 2) = std::numeric_limits<double>::denorm_min();
    m(0, 3) = std::numeric_limits<double>::max();
    m(0, 4) = -0.0;
    m(0, 5) = 5e-324;
    const auto dir = temp_dir("csv_roundtrip");
    save_csv(dir / "m.csv", m, "a,b,c,d,e,f,g");
    EXPECT_TRUE(bitwise_equal(load_csv(dir / "m.csv"), m));
}

TEST(Csv, FormatDoubleShortest) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
    double back = 0;
    ASSERT_TRUE(parse_double(format_double(1.0 / 3.0), back));
    EXPECT_EQ(back, 1.0 / 3.0);
}

TEST(Csv, MissingFileIsDataError) {
    EXPECT_THROW(load_csv("/nonexistent/dir/file.csv"), DataError);
}

TEST(KeyValues, ParsesCommentsAndTrims) {
    const KeyValues kv = parse_key_values("# comment\n a : 1 \n\nb:two words\n");
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two words");
}

TEST(KeyValues, RejectsDuplicatesAndMissingColon) {
    EXPECT_THROW(parse_key_values("a: 1\na: 2\n"), DataError);
    EXPECT_THROW(parse_key_values("just text\n"), DataError);
    EXPECT_THROW(parse_key_values(": value\n"), DataError);
}

TEST(KeyValues, TypedLookups) {
    const KeyValues kv = parse_key_values("n: 12\nx: 2.5\nbad: 1.5\n");
    EXPECT_EQ(get_count(kv, "n", 0), 12u);
    EXPECT_EQ(get_count(kv, "missing", 7), 7u);
    EXPECT_DOUBLE_EQ(get_real(kv, "x", 0), 2.5);
    EXPECT_THROW(get_count(kv, "bad", 0), DataError);
}

TEST(SplitList, TrimsPieces) {
    EXPECT_EQ(split_list(" a, b ,c"), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(split_list("  ").empty());
}
