// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Writes a directory of procedural test images, for trying the codec
// without a photo dataset. Image i uses seed (--seed + i).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "mae/image.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Generate procedural RGB test images"};
    std::string output;
    std::size_t count = 20, width = 128, height = 128;
    std::uint64_t seed = 1000;
    std::string ext = "ppm";
    app.add_option("--output", output, "Directory to create")->required();
    app.add_option("--count", count, "Number of images");
    app.add_option("--width", width, "Width in pixels")->check(CLI::PositiveNumber);
    app.add_option("--height", height, "Height in pixels")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed of the first image");
    app.add_option("--format", ext, "ppm or png")->check(CLI::IsMember({"ppm", "png"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (ext == "png" && !mae::png_supported()) throw std::runtime_error("built without PNG support");
        std::filesystem::create_directories(output);
        for (std::size_t i = 0; i < count; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "img%04zu.%s", i, ext.c_str());
            mae::write_image(std::filesystem::path(output) / name, mae::synthetic_image(width, height, seed + i));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
