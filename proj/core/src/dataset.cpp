#include "qtomo/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qtomo/errors.hpp"

namespace qtomo {

namespace {

std::string sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

void write_double(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

std::vector<double> parse_row(const std::string& line, std::size_t expect, const std::string& path) {
    std::vector<double> out;
    out.reserve(expect);
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    if (out.size() != expect)
        throw IoError("malformed CSV row in " + path + ": expected " + std::to_string(expect) +
                      " columns, got " + std::to_string(out.size()));
    return out;
}

} // namespace

void DataSet::save(const std::string& csv_path) const {
    std::ofstream os(csv_path);
    if (!os) throw IoError("cannot open " + csv_path + " for writing");
    const bool mm = multimode();
    os << (mm ? "x,phi,theta,psi0,psi1\n" : "x,phi\n");
    for (std::size_t i = 0; i < size(); ++i) {
        write_double(os, x[i]);
        os << ',';
        write_double(os, phi[i]);
        if (mm) {
            os << ',';
            write_double(os, theta[i]);
            os << ',';
            write_double(os, psi0[i]);
            os << ',';
            write_double(os, psi1[i]);
        }
        os << '\n';
    }
    if (!os) throw IoError("write failure on " + csv_path);

    nlohmann::json meta{{"schema", "qtomo-dataset-v1"},
                        {"n", size()},
                        {"eta", eta},
                        {"seed", seed},
                        {"multimode", mm},
                        {"state", state_spec}};
    std::ofstream js(sidecar_path(csv_path));
    if (!js) throw IoError("cannot open " + sidecar_path(csv_path) + " for writing");
    js << meta.dump(2) << '\n';
    if (!js) throw IoError("write failure on " + sidecar_path(csv_path));
}

DataSet DataSet::load(const std::string& csv_path) {
    std::ifstream is(csv_path);
    if (!is) throw IoError("cannot open " + csv_path);
    DataSet ds;

    std::string header;
    if (!std::getline(is, header)) throw IoError("empty data file " + csv_path);
    bool mm;
    if (header == "x,phi")
        mm = false;
    else if (header == "x,phi,theta,psi0,psi1")
        mm = true;
    else
        throw IoError("unrecognized CSV header in " + csv_path + ": " + header);

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto row = parse_row(line, mm ? 5 : 2, csv_path);
        ds.x.push_back(row[0]);
        ds.phi.push_back(row[1]);
        if (mm) {
            ds.theta.push_back(row[2]);
            ds.psi0.push_back(row[3]);
            ds.psi1.push_back(row[4]);
        }
    }

    std::ifstream js(sidecar_path(csv_path));
    if (js) {
        nlohmann::json meta = nlohmann::json::parse(js, nullptr, true, true);
        ds.eta = meta.value("eta", 1.0);
        ds.seed = meta.value("seed", std::uint64_t{0});
        if (meta.contains("state")) ds.state_spec = meta["state"];
    }
    return ds;
}

void TwoModeDataSet::save(const std::string& csv_path) const {
    std::ofstream os(csv_path);
    if (!os) throw IoError("cannot open " + csv_path + " for writing");
    os << "x1,phi1,x2,phi2\n";
    for (std::size_t i = 0; i < size(); ++i) {
        write_double(os, x1[i]);
        os << ',';
        write_double(os, phi1[i]);
        os << ',';
        write_double(os, x2[i]);
        os << ',';
        write_double(os, phi2[i]);
        os << '\n';
    }
    if (!os) throw IoError("write failure on " + csv_path);

    nlohmann::json meta{{"schema", "qtomo-dataset2-v1"},
                        {"n", size()},
                        {"eta", eta},
                        {"seed", seed},
                        {"state", state_spec}};
    std::ofstream js(sidecar_path(csv_path));
    if (!js) throw IoError("cannot open " + sidecar_path(csv_path) + " for writing");
    js << meta.dump(2) << '\n';
}

TwoModeDataSet TwoModeDataSet::load(const std::string& csv_path) {
    std::ifstream is(csv_path);
    if (!is) throw IoError("cannot open " + csv_path);
    TwoModeDataSet ds;

    std::string header;
    if (!std::getline(is, header)) throw IoError("empty data file " + csv_path);
    if (header != "x1,phi1,x2,phi2")
        throw IoError("unrecognized CSV header in " + csv_path + ": " + header);

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto row = parse_row(line, 4, csv_path);
        ds.x1.push_back(row[0]);
        ds.phi1.push_back(row[1]);
        ds.x2.push_back(row[2]);
        ds.phi2.push_back(row[3]);
    }

    std::ifstream js(sidecar_path(csv_path));
    if (js) {
        nlohmann::json meta = nlohmann::json::parse(js, nullptr, true, true);
        ds.eta = meta.value("eta", 1.0);
        ds.seed = meta.value("seed", std::uint64_t{0});
        if (meta.contains("state")) ds.state_spec = meta["state"];
    }
    return ds;
}

} // namespace qtomo
