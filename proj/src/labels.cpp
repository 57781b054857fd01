#include "coopsim/labels.hpp"

#include "coopsim/errors.hpp"

namespace coopsim {

std::string to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Car: return "car";
    case ClassLabel::Bus: return "bus";
    case ClassLabel::Truck: return "truck";
    case ClassLabel::Person: return "person";
    case ClassLabel::Bicycle: return "bicycle";
  }
  throw InputError("unknown class label value");
}

ClassLabel class_label_from_string(const std::string& name) {
  for (ClassLabel label : kAllClasses) {
    if (to_string(label) == name) return label;
  }
  throw InputError("unknown class label: " + name);
}

}  // namespace coopsim
