#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "permlab/constructions.hpp"
#include "permlab/model.hpp"

namespace permlab {

class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Text checkpoint, format tag DTX1. Decimal serialization at 17 significant
// digits makes save -> load -> save byte-identical.
struct Checkpoint {
    ModelWeights weights;
    std::uint64_t seed = 0;
    std::size_t step = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void write_checkpoint(const Checkpoint& ckpt, std::ostream& os);
Checkpoint read_checkpoint(std::istream& is, const std::string& origin);

// Sidecar metadata (<checkpoint>.meta) carrying a bundle's expected output
// location so constructed weights can be re-verified after a round trip.
void save_bundle_meta(const ConstructionBundle& bundle, const std::string& path);
ConstructionBundle load_bundle(const std::string& checkpoint_path);

// Grayscale heatmap: plain-text PGM (magic P2), one sample per weight,
// 0-255 after per-matrix max-abs normalization. Raw values go to `csv_path`.
void write_heatmap(const Matrix& a, const std::string& pgm_path, const std::string& csv_path);

// key=value run-config file; '#' starts a comment. Returns the parsed pairs;
// unknown keys are the caller's concern (they are rejected, not ignored).
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

const char* mask_name(MaskMode m);
const char* padding_name(Padding p);
MaskMode parse_mask(const std::string& s);
Padding parse_padding(const std::string& s);

}  // namespace permlab
