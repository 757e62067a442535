import { DialogApi } from './api.js';
import { ConsoleApp } from './console.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('service') ?? 'http://127.0.0.1:8080';
new ConsoleApp(new DialogApi(baseUrl), document.getElementById('app')!);
