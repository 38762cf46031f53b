import { ChatApp } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  void new ChatApp(root).boot();
}
