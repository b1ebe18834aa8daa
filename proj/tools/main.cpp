#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) { return hsca::app::run(argc, argv, std::cout, std::cerr); }
