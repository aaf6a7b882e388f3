#include <atomic>
#include <filesystem>
#include <stdexcept>

#include <gtest/gtest.h>

#include "hysteresis/io.hpp"
#include "hysteresis/parallel.hpp"

using namespace hysteresis;

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, RecordsOutputs) {
  const auto dir = std::filesystem::temp_directory_path() / "hysteresis_io_test";
  std::filesystem::remove_all(dir);
  RunManifest m;
  m.subcommand = "simulate";
  write_output(dir / "nested", "a.csv", "x\n1\n", m);
  ASSERT_EQ(m.outputs.size(), 1u);
  EXPECT_EQ(m.outputs[0].bytes, 4u);
  EXPECT_EQ(m.outputs[0].sha256, sha256_hex("x\n1\n"));
  EXPECT_EQ(read_text_file(dir / "nested" / "a.csv"), "x\n1\n");
  const auto j = m.to_json();
  EXPECT_EQ(j.at("outputs").at(0).at("path"), "a.csv");
  std::filesystem::remove_all(dir);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, Rethrows) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
