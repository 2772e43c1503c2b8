#include "facial/io/openface_csv.hpp"

#include "facial/common/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace facial::io {

namespace {

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ','))
        cells.push_back(trim(cell));
    return cells;
}

} // namespace

OpenFaceTracks ingest_openface_csv(const std::filesystem::path& path, double fps)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open for reading: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::bad_header, path.string() + ": empty CSV");
    const auto header = split_csv_line(line);

    constexpr std::array<const char*, 7> wanted{"pose_Rx", "pose_Ry", "pose_Rz", "pose_Tx",
                                                "pose_Ty", "pose_Tz", "AU45_r"};
    std::array<std::size_t, 7> column{};
    for (std::size_t w = 0; w < wanted.size(); ++w) {
        auto it = std::find(header.begin(), header.end(), wanted[w]);
        if (it == header.end())
            throw Error(ErrorKind::bad_header, path.string() + ": missing column " + wanted[w]);
        column[w] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::array<float, 7>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split_csv_line(line);
        std::array<float, 7> row{};
        for (std::size_t w = 0; w < wanted.size(); ++w) {
            if (column[w] >= cells.size())
                throw Error(ErrorKind::truncated, path.string() + ": short row at line " + std::to_string(line_no));
            const std::string& cell = cells[column[w]];
            float value = 0.0f;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw Error(ErrorKind::bad_header, path.string() + ": bad number '" + cell + "' at line "
                                                       + std::to_string(line_no));
            row[w] = value;
        }
        rows.push_back(row);
    }

    MatrixXf pose(static_cast<Eigen::Index>(rows.size()), kPoseDim);
    MatrixXf blink(static_cast<Eigen::Index>(rows.size()), kBlinkDim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (int d = 0; d < kPoseDim; ++d)
            pose(static_cast<Eigen::Index>(r), d) = rows[r][static_cast<std::size_t>(d)];
        blink(static_cast<Eigen::Index>(r), 0) = rows[r][6];
    }
    return {make_track(TrackKind::pose, fps, std::move(pose)), make_track(TrackKind::blink_au, fps, std::move(blink))};
}

} // namespace facial::io
