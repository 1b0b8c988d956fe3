// Browser entry point. The API base defaults to the page origin; override
// with ?api=http://host:port when the service runs elsewhere.

import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "";
createApp(document.getElementById("app")!, new ApiClient(base));
