// Entry point: mounts the portal for the user named in ?user= (default dev00).

import { ApiClient } from "./api.js";
import { mountPortal } from "./app.js";

const params = new URLSearchParams(window.location.search);
const user = params.get("user") ?? "dev00";
const root = document.getElementById("app");
if (root) {
  void mountPortal(root, new ApiClient(""), user);
}
