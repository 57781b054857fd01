#pragma once

#include <array>
#include <string>

namespace coopsim {

enum class ClassLabel { Car, Bus, Truck, Person, Bicycle };

inline constexpr std::array<ClassLabel, 5> kAllClasses = {
    ClassLabel::Car, ClassLabel::Bus, ClassLabel::Truck, ClassLabel::Person,
    ClassLabel::Bicycle};

std::string to_string(ClassLabel label);
ClassLabel class_label_from_string(const std::string& name);  // throws InputError

}  // namespace coopsim
