#include "qigl/cli.hpp"

int main(int argc, char** argv) {
    return qigl::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
