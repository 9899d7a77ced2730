#include "bong/idx.hpp"

#include <fstream>

namespace bong {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw TruncatedFile(path + ": header cut short");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
  out.write(b, 4);
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + path);
  return in;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, Index limit) {
  auto img = open(images_path);
  auto lbl = open(labels_path);

  std::uint32_t m = read_be32(img, images_path);
  if (m != kIdxImagesMagic) throw BadMagic(images_path + ": not an IDX image file");
  const std::uint32_t n_img = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  m = read_be32(lbl, labels_path);
  if (m != kIdxLabelsMagic) throw BadMagic(labels_path + ": not an IDX label file");
  const std::uint32_t n_lbl = read_be32(lbl, labels_path);
  if (n_img != n_lbl)
    throw CountMismatch(std::to_string(n_img) + " images vs " + std::to_string(n_lbl) + " labels");

  Index n = n_img;
  if (limit >= 0 && limit < n) n = limit;
  const Index D = Index(rows) * Index(cols);

  std::vector<unsigned char> pix(std::size_t(D) * std::size_t(n));
  if (!img.read(reinterpret_cast<char*>(pix.data()), std::streamsize(pix.size())))
    throw TruncatedFile(images_path + ": pixel data cut short");
  std::vector<unsigned char> lab(static_cast<std::size_t>(n));
  if (!lbl.read(reinterpret_cast<char*>(lab.data()), std::streamsize(lab.size())))
    throw TruncatedFile(labels_path + ": label data cut short");

  Dataset ds{"idx", Mat(D, n), Mat::Zero(10, n), TaskKind::Classification};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < D; ++j) ds.X(j, i) = pix[std::size_t(i * D + j)] / 255.0;
    if (lab[std::size_t(i)] > 9) throw ShapeError("label out of range 0..9");
    ds.Y(lab[std::size_t(i)], i) = 1.0;
  }
  return ds;
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  std::ofstream out(path, std::ios::binary);
  write_be32(out, kIdxImagesMagic);
  write_be32(out, n);
  write_be32(out, rows);
  write_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), std::streamsize(pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, std::uint32_t(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

}  // namespace bong
