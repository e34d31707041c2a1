// Minimal external backend used by the test suite. Speaks the binary wire
// protocol on stdin/stdout and misbehaves on request:
//   --classes K        respond with K classes (default 23)
//   --mode uniform     uniform probability vectors (default)
//   --mode offsum      vectors summing to 1 + 5e-4 (renormalizable)
//   --mode badsum      vectors summing to 1.2 (normalization violation)
//   --mode truncate    write half a response, then exit
//   --mode die         exit after reading the first request
//   --mode badmagic    respond with a wrong magic

#include <cstring>
#include <iostream>
#include <string>

#include <unistd.h>

#include "msbench/external_backend.hpp"

int main(int argc, char** argv) {
    int classes = 23;
    std::string mode = "uniform";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--classes" && i + 1 < argc) {
            classes = std::atoi(argv[++i]);
        } else if (arg == "--mode" && i + 1 < argc) {
            mode = argv[++i];
        } else {
            std::cerr << "wire_stub: unknown argument " << arg << "\n";
            return 2;
        }
    }

    using namespace msbench;
    try {
        while (auto request = wire::read_request(STDIN_FILENO)) {
            if (mode == "die") return 0;

            wire::Response resp;
            resp.window_count = request->window_count;
            resp.class_count = static_cast<std::uint32_t>(classes);
            float value = 1.0f / static_cast<float>(classes);
            if (mode == "offsum") value = (1.0f + 5e-4f) / static_cast<float>(classes);
            if (mode == "badsum") value = 1.2f / static_cast<float>(classes);
            resp.probs.assign(static_cast<std::size_t>(resp.window_count) * classes, value);

            auto bytes = wire::encode_response(resp);
            if (mode == "badmagic") bytes[0] = 'X';
            if (mode == "truncate") {
                wire::write_all(STDOUT_FILENO, bytes.data(), bytes.size() / 2);
                return 0;
            }
            wire::write_all(STDOUT_FILENO, bytes.data(), bytes.size());
        }
    } catch (const Error& e) {
        std::cerr << "wire_stub: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
