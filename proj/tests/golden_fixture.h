// SPDX-License-Identifier: Apache-2.0

// Frozen reference bitstreams: a voxelized sphere shell (radius 9, center
// (16,16,16)) encoded with the baseline model at depth 5. Regenerating them
// must stay byte-identical on every platform.

#ifndef OLC_TESTS_GOLDEN_FIXTURE_H
#define OLC_TESTS_GOLDEN_FIXTURE_H

#include <cstdint>
#include <string>
#include <vector>

namespace olc::testdata {

// depth 5, s = 8, no checkerboard
inline const char* kGoldenHexS8 =
  "4f4c43310105080095524a29a594e23f0000000000001c400000000000001c400000000000001c407604000000000000"
  "000000000000000039010000000000006402000000000000ff7d40604e75a0c1d76273dba966ef4193a9080464159fe8"
  "76f16f0a6ff0e0096d261f704ed0e24d41a8231890052c6cdee119d4dd7e466bc9261b3365250e68f665bc472f81d620"
  "a98f2951abcbecd1e310b564277ee57bb5e0502deb043c44d792b986a2fc448fa2473dc552a98ff2a3ff0dfe4d512900"
  "c74bfa4d2904fed4f02655be4d4ec5f916fccfeda12e7d04ecc8edcfeaf0fbe5dbcdbeee1e09de942372cbbd56c52728"
  "a5de5f19cb0d6c08c18a06da7424ff4429a9fd95cb7562da2d1703c2330d71c606277a602a6921ec091234f855ce4449"
  "30eb07d4b9e87f31f9208511780b1a2857c9be90082ba25164ff208dc7d350b643b49c0698f7793fc85b7a5b2e63b838"
  "b816061a4ecd8db18710d1673752ef8dbaa14c632656010c7cc8c4728bfcdbcb6304f458120c637ba73f5e365263c59d"
  "00000000000a44c343d9450bc6d26c87579216d142ec9b00000016c7a5c588e5ff1ad20000013cb371cff16ee611d67a"
  "9219b5833908059a1575cf6916769526eb285853b2a6336c365257ea1e611a48f63984c42421f929f3c1ba4e3b196c57"
  "e040910de61fa6b9feeb33bee56c20c5883ddf6ee7727c8da95b445763177ab76e19c5e8e852c7ba029f4953adaf4b9f"
  "60a47ac7a2a022188582a52e77b6d191e13aceb915bd43955ce13daaf40e8a4433c7d0a3d98fabac6281bdb7b146ccda"
  "73a1e2cafcb885a58f03abe66848fb56b8944e6e013630a30a533c2b43bae43575d45ac7872c467fe38c8dac05a5a49b"
  "7644b775ebefadb0593f5c37a53f516d94d7489482400b7acfcfa3339be0571b445fdb94a06cb1deb093b10ea308fdca"
  "4f67c8afa939db03508dd2ca5637880ed17ec7e690e705853dd0765d2a72e4d90bab7b5aa26f56d3c87d59fa6bc99974"
  "494957c4aae94bd424b3f0169c2966b192ab892f0a683df155ec51d860ea1e40f77d176e3d79d9d442f55681f8abb275"
  "aa8cb352f2ec47bb16efe8bf69b282cfe3718a90f63e67d9f601949de6b9d66cd91673d137a6d7c046ccb386e4d5e8ea"
  "316c77bf5105782e16efc96543f02bf079351931ec571e7ad02e2d20a9d905eb14d2b381789358deb165ef476e4a39f4"
  "aa348ce2a3f71e36a6fcf0ccd7d89d4cfdd8c45567fbb82410d0e8896a812968649e25d50c187e09cf643721a5b632ab"
  "4c792671ac78e122f494aaebf5294af80035c8aaa5f2ac865b9173e536f60b5ac78ee2db671b65e744044eff9f200c87"
  "0b85333dd072c13dbe71dc054ee1875b6641eee06b55f2951e2b0b3f6a0806e8c616fb0000";
constexpr size_t kGoldenCountS8 = 1142;
constexpr uint64_t kGoldenHashS8 = 0x3087efb4f3526fffull;

// depth 5, s = 3, checkerboard
inline const char* kGoldenHexS3 =
  "4f4c43310105030295524a29a594e23f0000000000001c400000000000001c400000000000001c407604000000000000"
  "00000000000000003801000000000000e200000000000000ff7d70dce0ac9533213d7cc208fb751f6bb88f6087f3f8ce"
  "fe96e03ce4a3f9075be7b8678680279caa473c5abb7462997eb708f02d2187491f4f61ed330ff05da94ddc63a6cda474"
  "09b0a3205f5cba2222e5b3b7436239a229504626c09f5f96b384054e434f70ee546a554d20f9d9ad08519c9c7a55a2dd"
  "bffbe6c52e78a3a6c4ae1ba96e964fa60af938b009a156005eafb2a9ab236caaf0d2d0a2569c3cfb7e9dcf9bdedb6f70"
  "9dc03c02d52178df735400e23c2e045177a917f022f299dc605e28d43461aef744891c31dea677f68f365abcacb71907"
  "859651a2a219a1437fe38bc06f6d51dc3495cd304fac29a79e080bdb989d153fc594d923c6e32bcdb8305e493aa5d506"
  "cf6ff7c0f1f6d610e6e5d365a9c514453b2805637aa3c8c3091ec2f53abdb625b57ab1cb847e8e2ac4a9cede62f97100"
  "000000000a44c343d9450bc6d26c87579216d142ec9b00000016c7a5c588e5ff1ad20000013cb371cff16ee611d67a92"
  "19b5833908059a1575cf6916769526eb285853b2a6336c365257ea1e611a48f63984c42421f929f3c1ba4e3b196c57e0"
  "40910de61fa6b9feeb33bee56c20c5883ddf6ee7727c8da95b445763177ab76e19c5e8e852c7ba029f4953adaf4b9f60"
  "a47ac7a2a022188582a52e77b6d191e13aceb915bd43955ce13daaf40e8a4433c7d0a3d98fabac6281bdb7b146ccda73"
  "a1e2cafcb885a58f03abe66848fb56b8944e6e013630a30a533c2b43bae431f20000";
constexpr size_t kGoldenCountS3 = 916;
constexpr uint64_t kGoldenHashS3 = 0x1a19cfd29b914705ull;

inline std::vector<uint8_t> bytesFromHex(const std::string& hex) {
  std::vector<uint8_t> out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  return out;
}

}  // namespace olc::testdata

#endif
