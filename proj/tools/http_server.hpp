#pragma once

#include <string>

#include "service.hpp"

namespace httplib {
class Server;
}

namespace rulebench {

// Binds the /api routes of `service` onto `server`. The service must outlive
// the server.
void install_routes(httplib::Server& server, AnnotationService& service);

}  // namespace rulebench
