#ifndef FENVM_CLI_HPP
#define FENVM_CLI_HPP

namespace fenvm {

// Exit codes: 0 success, 1 other failure, 2 config error, 3 fit failure.
int run_cli(int argc, char** argv);

}  // namespace fenvm

#endif  // FENVM_CLI_HPP
