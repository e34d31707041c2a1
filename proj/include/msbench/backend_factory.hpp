#pragma once

#include <memory>

#include "msbench/backend.hpp"
#include "msbench/external_backend.hpp"
#include "msbench/reference_backend.hpp"
#include "msbench/synthetic_backend.hpp"

namespace msbench {

inline std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc) {
    switch (desc.kind) {
        case BackendDescriptor::Kind::reference:
            return std::make_unique<ReferenceBackend>(desc.reference_seed);
        case BackendDescriptor::Kind::synthetic:
            return std::make_unique<SyntheticBackend>(desc.latency, desc.class_count);
        case BackendDescriptor::Kind::external:
            return std::make_unique<ExternalBackend>(desc.external_command, desc.class_count);
    }
    throw ArgumentError("unknown backend kind");
}

} // namespace msbench
