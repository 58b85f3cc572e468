#include "commands.hpp"

int main(int argc, char** argv) {
  return momentdro::cli::run(argc, argv);
}
