#pragma once

namespace gridsplit {

// Sets the log level from GRIDSPLIT_LOG (trace, debug, info, warn, error,
// off). Defaults to warn.
void configure_logging();

}  // namespace gridsplit
