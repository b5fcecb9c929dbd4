// Prints the toy curve chosen by the representativeness scan.
#include <iostream>

#include "distress/profile.hpp"

int main() {
    using namespace distress;
    const BitLayout layout{4, 3, 3, 3};
    const ToyCurveChoice c = find_toy_curve(8191, layout, 0.01, 0.005);
    std::cout << "a=" << to_string(c.a) << " b=" << to_string(c.b) << " order=" << c.group_order
              << " gen=(" << to_string(c.gen.x.value()) << ", " << to_string(c.gen.y.value()) << ")"
              << " slot_fraction=" << c.slot_fraction << " fp=" << c.false_positive_rate << "\n";
}
