import { ApiClient } from "./api.js";
import { Dashboard } from "./dashboard.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8080";
const subject = params.get("subject") ?? "alice";

const mount = document.getElementById("app");
if (mount) {
  const dashboard = new Dashboard(mount, new ApiClient(baseUrl), subject);
  void dashboard.start();
}
