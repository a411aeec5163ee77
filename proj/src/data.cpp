#include "zonn/data.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "zonn/error.hpp"
#include "zonn/io.hpp"
#include "zonn/random.hpp"

namespace zonn {

namespace {

constexpr std::uint32_t idx_images_magic = 0x00000803;
constexpr std::uint32_t idx_labels_magic = 0x00000801;

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
    return v;
  }

  const unsigned char* take(std::size_t n) {
    need(n);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += n;
    return p;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      fail(ErrorKind::parse, name_ + ": truncated at byte " + std::to_string(pos_) + " (needed " + std::to_string(n) +
                                 " more)");
  }

  const std::string& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

void LabeledDataset::validate() const {
  require(size() >= 1, ErrorKind::data, "dataset is empty");
  require(num_classes >= 2, ErrorKind::data, "dataset needs at least 2 classes");
  require(static_cast<Eigen::Index>(labels.size()) == size(), ErrorKind::data,
          std::to_string(labels.size()) + " labels for " + std::to_string(size()) + " inputs");
  require(in_unit_cube(inputs), ErrorKind::data, "input component outside [0, 1]");
  for (std::size_t i = 0; i < labels.size(); ++i)
    require(labels[i] >= 0 && labels[i] < num_classes, ErrorKind::data,
            "label " + std::to_string(labels[i]) + " at index " + std::to_string(i) + " outside [0, " +
                std::to_string(num_classes) + ")");
}

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& indices) const {
  LabeledDataset out{Matrix(dim(), static_cast<Eigen::Index>(indices.size())), {}, num_classes, split};
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] >= 0 && indices[i] < size(), ErrorKind::parameter, "subset index out of range");
    out.inputs.col(static_cast<Eigen::Index>(i)) = inputs.col(indices[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(indices[i])]);
  }
  return out;
}

LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::optional<std::size_t> limit, int num_classes, Split split) {
  const std::string image_bytes = read_file(images_path);
  const std::string label_bytes = read_file(labels_path);
  ByteReader images(image_bytes, images_path.string());
  ByteReader labels(label_bytes, labels_path.string());

  const std::uint32_t image_magic = images.u32();
  require(image_magic == idx_images_magic, ErrorKind::parse,
          images_path.string() + ": bad magic " + hex(image_magic) + ", expected " + hex(idx_images_magic));
  const std::uint32_t label_magic = labels.u32();
  require(label_magic == idx_labels_magic, ErrorKind::parse,
          labels_path.string() + ": bad magic " + hex(label_magic) + ", expected " + hex(idx_labels_magic));

  const std::uint32_t n_images = images.u32();
  const std::uint32_t rows = images.u32();
  const std::uint32_t cols = images.u32();
  const std::uint32_t n_labels = labels.u32();
  require(n_images == n_labels, ErrorKind::validation,
          std::to_string(n_images) + " images but " + std::to_string(n_labels) + " labels");
  require(rows > 0 && cols > 0, ErrorKind::validation, "image dimensions must be positive");

  std::size_t n = n_images;
  if (limit) n = std::min(n, *limit);
  require(n >= 1, ErrorKind::data, "IDX dataset is empty");
  const std::size_t d = std::size_t{rows} * cols;

  LabeledDataset out{Matrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)), std::vector<int>(n), num_classes,
                     split};
  const unsigned char* pixels = images.take(n * d);
  const unsigned char* label_data = labels.take(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      out.inputs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = pixels[i * d + j] / 255.0;
    out.labels[i] = label_data[i];
  }
  out.validate();
  return out;
}

void write_idx(const LabeledDataset& data, std::uint32_t rows, std::uint32_t cols,
               const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  data.validate();
  require(static_cast<Eigen::Index>(std::size_t{rows} * cols) == data.dim(), ErrorKind::shape,
          "rows x cols does not match the input dimension");
  require(data.num_classes <= 256, ErrorKind::data, "IDX labels are single bytes");
  const auto n = static_cast<std::uint32_t>(data.size());
  std::string images, labels;
  put_u32(images, idx_images_magic);
  put_u32(images, n);
  put_u32(images, rows);
  put_u32(images, cols);
  put_u32(labels, idx_labels_magic);
  put_u32(labels, n);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j)
      images.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(data.inputs(j, i) * 255.0))));
    labels.push_back(static_cast<char>(static_cast<unsigned char>(data.labels[static_cast<std::size_t>(i)])));
  }
  write_file_atomic(images_path, images);
  write_file_atomic(labels_path, labels);
}

LabeledDataset load_csv(const std::filesystem::path& path, int num_classes, Split split) {
  require(num_classes >= 2, ErrorKind::parameter, "num_classes must be at least 2");
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    require(cells.size() >= 2, ErrorKind::parse, where + ": need at least one feature and a label");
    if (!rows.empty())
      require(cells.size() == rows.front().size() + 1, ErrorKind::parse,
              where + ": expected " + std::to_string(rows.front().size() + 1) + " columns, found " +
                  std::to_string(cells.size()));

    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return s;
    };
    std::vector<double> features;
    for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
      const auto cell = trim(cells[c]);
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      require(ec == std::errc() && ptr == cell.data() + cell.size(), ErrorKind::parse,
              where + ": column " + std::to_string(c + 1) + ": '" + std::string(cell) + "' is not a number");
      require(v >= 0 && v <= 1, ErrorKind::validation,
              where + ": column " + std::to_string(c + 1) + ": feature " + std::string(cell) + " outside [0, 1]");
      features.push_back(v);
    }
    const auto cell = trim(cells.back());
    int label = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    require(ec == std::errc() && ptr == cell.data() + cell.size(), ErrorKind::parse,
            where + ": label '" + std::string(cell) + "' is not an integer");
    require(label >= 0 && label < num_classes, ErrorKind::validation,
            where + ": label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
    rows.push_back(std::move(features));
    labels.push_back(label);
  }
  require(!rows.empty(), ErrorKind::data, path.string() + ": no data rows");

  LabeledDataset out{Matrix(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size())),
                     std::move(labels), num_classes, split};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.inputs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[i][j];
  out.validate();
  return out;
}

void write_csv(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) os << data.inputs(j, i) << ',';
    os << data.labels[static_cast<std::size_t>(i)] << '\n';
  }
  write_file_atomic(path, os.str());
}

LabeledDataset make_blobs(const BlobsRecipe& recipe, Split split) {
  require(recipe.n >= 1, ErrorKind::parameter, "blob count must be at least 1");
  require(recipe.centers.size() >= 2, ErrorKind::parameter, "blobs need at least 2 centers");
  require(recipe.spread > 0, ErrorKind::parameter, "blob spread must be positive");
  for (const auto& c : recipe.centers)
    require(c[0] >= 0 && c[0] <= 1 && c[1] >= 0 && c[1] <= 1, ErrorKind::parameter, "blob center outside [0, 1]^2");

  const SeededStream stream(recipe.seed, 0x626c6f6273ULL);
  const auto m = recipe.centers.size();
  LabeledDataset out{Matrix(2, static_cast<Eigen::Index>(recipe.n)), std::vector<int>(recipe.n),
                     static_cast<int>(m), split};
  for (std::size_t i = 0; i < recipe.n; ++i) {
    const auto& c = recipe.centers[i % m];
    for (int j = 0; j < 2; ++j) {
      const double v = c[static_cast<std::size_t>(j)] + recipe.spread * stream.normal(2 * i + static_cast<std::size_t>(j));
      out.inputs(j, static_cast<Eigen::Index>(i)) = std::clamp(v, 0.0, 1.0);
    }
    out.labels[i] = static_cast<int>(i % m);
  }
  out.validate();
  return out;
}

}  // namespace zonn
