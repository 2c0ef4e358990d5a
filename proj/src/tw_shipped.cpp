#include <string>

#include "bbp/theory.hpp"

namespace bbp {

// Defined in the build-generated tw1_table_data.cpp.
extern const char* const kTw1TableCsv;
extern const char* const kTw1TableCrc32;

const Tw1Table& Tw1Table::shipped() {
  static const Tw1Table table = from_csv(kTw1TableCsv);
  return table;
}

unsigned long shipped_tw1_crc32() { return crc32_of(kTw1TableCsv); }

unsigned long recorded_tw1_crc32() { return std::stoul(kTw1TableCrc32, nullptr, 16); }

}  // namespace bbp
