#pragma once

#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nira/errors.hpp"
#include "nira/weights_io.hpp"

namespace nira {

// Line-oriented run record, schema nira-stats-v1:
//
//   nira-stats-v1
//   <key> <value>                      one scalar per line, in insertion order
//   table <name> <col>...              followed by rows, closed by "end"
//   row <value>...
//   end
//
// Keys under "timing." hold wall-clock measurements; everything else is reproducible.
class StatsFile {
public:
    void set(const std::string& key, const std::string& value) { lines_.push_back(key + ' ' + value); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, unsigned value) { set(key, std::to_string(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, bool value) { set(key, value ? "true" : "false"); }

    void begin_table(const std::string& name, const std::vector<std::string>& columns)
    {
        std::string line = "table " + name;
        for (const auto& c : columns) line += ' ' + c;
        lines_.push_back(line);
    }

    void row(const std::vector<std::string>& cells)
    {
        std::string line = "row";
        for (const auto& c : cells) line += ' ' + c;
        lines_.push_back(line);
    }

    void end_table() { lines_.push_back("end"); }

    void write(std::ostream& out) const
    {
        out << "nira-stats-v1\n";
        for (const auto& l : lines_) out << l << '\n';
    }

    void save(const std::string& path) const
    {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write stats file '" + path + "'");
        write(out);
        if (!out) throw IoError("write failed for stats file '" + path + "'");
    }

private:
    std::vector<std::string> lines_;
};

} // namespace nira
