// Checks serialized run traces. Exit status: 0 clean, 1 violations, 2 unreadable.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epon/validate.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Check EPON sleep-simulator traces against the protocol rules"};
  std::vector<std::string> files;
  bool quiet = false;
  app.add_option("traces", files, "Trace files ('-' for stdin)")->required();
  app.add_flag("-q,--quiet", quiet, "Only set the exit status");
  CLI11_PARSE(app, argc, argv);

  int status = 0;
  for (const auto& path : files) {
    try {
      std::vector<epon::validate::Violation> violations;
      if (path == "-") {
        violations = epon::validate::validate(std::cin);
      } else {
        std::ifstream in(path);
        if (!in) throw epon::validate::TraceFormatError("cannot open " + path);
        violations = epon::validate::validate(in);
      }
      for (const auto& v : violations) {
        if (!quiet) std::cout << path << ": " << v.time.count() << " " << epon::validate::rule_id(v.rule) << " " << v.detail << '\n';
      }
      if (!violations.empty() && status == 0) status = 1;
      if (!quiet && violations.empty()) std::cout << path << ": ok\n";
    } catch (const epon::validate::TraceFormatError& e) {
      std::cerr << path << ": unreadable trace: " << e.what() << '\n';
      status = 2;
    }
  }
  return status;
}
