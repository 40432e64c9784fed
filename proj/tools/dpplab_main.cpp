#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "dpplab/experiments.hpp"

namespace po = boost::program_options;

namespace {

std::vector<double> parse_n_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    po::options_description desc("dpplab <experiment> [options]");
    desc.add_options()                                                            //
        ("help,h", "show this help")                                              //
        ("experiment", po::value<std::string>(), "experiment name")               //
        ("config", po::value<std::string>(), "JSON config file")                  //
        ("seed", po::value<uint64_t>(), "base RNG seed")                          //
        ("out", po::value<std::string>(), "output directory")                     //
        ("n", po::value<double>(), "scale parameter n")                           //
        ("tau", po::value<double>(), "target Poisson intensity tau")              //
        ("v", po::value<double>(), "score radius v")                              //
        ("R", po::value<double>(), "window radius R")                             //
        ("replicates", po::value<double>(), "Monte Carlo replicates")             //
        ("c", po::value<double>(), "theorem constant c")                          //
        ("epsilon", po::value<double>(), "rate parameter epsilon")                //
        ("grid", po::value<double>(), "quadrature grid subdivisions")             //
        ("n-list", po::value<std::string>(), "comma-separated n sweep (maxnn)");  //

    po::positional_options_description pos;
    pos.add("experiment", 1);

    try {
        po::variables_map vm;
        po::store(
            po::command_line_parser(argc, argv).options(desc).positional(pos).run(), vm);
        po::notify(vm);

        if (vm.count("help") || !vm.count("experiment")) {
            std::cout << desc << "\nexperiments: sample voidprob vn bounds nnballs maxnn "
                         "na-test palm-test decay-test\n";
            return vm.count("help") ? 0 : 1;
        }

        dpplab::ExperimentConfig cfg;
        if (vm.count("config")) cfg = dpplab::config_from_json_file(vm["config"].as<std::string>());
        cfg.experiment = vm["experiment"].as<std::string>();
        if (vm.count("seed")) cfg.seed = vm["seed"].as<uint64_t>();
        if (vm.count("out")) cfg.output_dir = vm["out"].as<std::string>();
        if (vm.count("n-list")) cfg.n_list = parse_n_list(vm["n-list"].as<std::string>());
        for (const char* key : {"n", "tau", "v", "R", "replicates", "c", "epsilon", "grid"}) {
            if (vm.count(key)) cfg.params[key] = vm[key].as<double>();
        }

        const dpplab::ExperimentReport rep = dpplab::run_experiment(cfg);
        for (const auto& m : rep.metrics) {
            std::cout << m.name << " = " << m.value;
            if (m.se > 0) std::cout << " (se " << m.se << ")";
            if (!m.note.empty()) std::cout << "  [" << m.note << "]";
            std::cout << "\n";
        }
        std::cout << (rep.all_pass ? "ALL PASS" : "STATISTICAL FAIL") << "  ("
                  << rep.wall_clock_sec << " s)\n";
        return rep.all_pass ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
