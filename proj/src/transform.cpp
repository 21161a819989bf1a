#include "dichotome/transform.hpp"

namespace dichotome {

void validate_record(const TransformRecord& record, Index width, Index height, int channels) {
  const auto& map = record.class_map;
  if (map.width() != width || map.height() != height || map.channels() != channels) {
    std::ostringstream msg;
    msg << "record class map is " << map.width() << "x" << map.height() << "x" << map.channels()
        << " but the image is " << width << "x" << height << "x" << channels;
    throw RecordMismatch(msg.str());
  }
  if (record.params.gamma == 1.0 || !(record.params.k > 0.0)) {
    throw RecordMismatch("record params are not a valid dichotomy parameter set");
  }
  if (record.lut) {
    if (record.lut->gamma != record.params.gamma) {
      throw RecordMismatch("record LUT gamma disagrees with record params");
    }
    if (record.lut->entries.size() != static_cast<std::size_t>(record.lut->bit_max) + 1 ||
        record.lut->boundary_index < 0 || record.lut->boundary_index > record.lut->bit_max) {
      throw RecordMismatch("record LUT is malformed");
    }
  }
}

PlanarImage<double> render_class_map(const SlopeClassMap& map) {
  if (map.planes.empty()) throw DomainError("render_class_map: empty map");
  PlanarImage<double> out(map.width(), map.height(), 3);
  const auto asc = static_cast<std::uint8_t>(Branch::Ascending);
  if (map.channels() == 1) {
    const auto& tags = map.planes.front();
    out.channel(0) = (tags == asc).cast<double>();
    out.channel(2) = (tags != asc).cast<double>();
    return out;
  }
  for (int c = 0; c < 3; ++c) {
    out.channel(c) = (map.planes[static_cast<std::size_t>(c)] == asc).cast<double>();
  }
  return out;
}

}  // namespace dichotome
